#pragma once

#include <utility>

#include "vltrack/geometry.hpp"
#include "vltrack/image.hpp"

namespace vltrack {

// Invertible mapping between frame pixels and a square crop resized to
// out_size x out_size. Continuous coordinates; exact affine round trip.
struct CropMapping {
    int frame_w = 0, frame_h = 0;
    double center_x = 0, center_y = 0;  // crop center in frame pixels
    double side = 0;                    // crop side in frame pixels
    int out_size = 0;

    double scale() const { return side / out_size; }

    std::pair<double, double> to_crop(double fx, double fy) const {
        double s = scale();
        return {(fx - center_x) / s + out_size / 2.0, (fy - center_y) / s + out_size / 2.0};
    }
    std::pair<double, double> to_frame(double cx, double cy) const {
        double s = scale();
        return {(cx - out_size / 2.0) * s + center_x, (cy - out_size / 2.0) * s + center_y};
    }

    Box box_to_crop(const Box& b) const;
    Box box_to_frame(const Box& b) const;
};

// Square crop centered on the box center with area = area_factor * box area,
// resampled to out_size; pixels outside the frame take the frame mean color.
std::pair<Image, CropMapping> crop_patch(const Image& frame, const Box& box, double area_factor,
                                         int out_size);

}  // namespace vltrack
