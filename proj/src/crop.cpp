#include "vltrack/crop.hpp"

#include <cmath>

namespace vltrack {

Box CropMapping::box_to_crop(const Box& b) const {
    auto [x0, y0] = to_crop(b.x, b.y);
    double s = scale();
    return Box{x0, y0, b.w / s, b.h / s};
}

Box CropMapping::box_to_frame(const Box& b) const {
    auto [x0, y0] = to_frame(b.x, b.y);
    double s = scale();
    return Box{x0, y0, b.w * s, b.h * s};
}

std::pair<Image, CropMapping> crop_patch(const Image& frame, const Box& box, double area_factor,
                                         int out_size) {
    if (!box.valid()) throw Error("crop_patch: degenerate box");
    if (area_factor <= 0) throw Error("crop_patch: area_factor must be positive");
    if (out_size < 1) throw Error("crop_patch: out_size must be >= 1");
    if (box.x2() <= 0 || box.y2() <= 0 || box.x >= frame.width || box.y >= frame.height)
        throw Error("crop_patch: box entirely outside frame");

    CropMapping m;
    m.frame_w = frame.width;
    m.frame_h = frame.height;
    m.center_x = box.cx();
    m.center_y = box.cy();
    m.side = std::sqrt(area_factor * box.w * box.h);
    m.out_size = out_size;

    auto fill = frame.mean_color();
    Image patch{out_size, out_size};
    for (int y = 0; y < out_size; ++y)
        for (int x = 0; x < out_size; ++x) {
            auto [fx, fy] = m.to_frame(x + 0.5, y + 0.5);
            auto rgb = sample_bilinear(frame, fx, fy, fill);
            for (int c = 0; c < 3; ++c) patch.at(x, y, c) = rgb[c];
        }
    return {std::move(patch), m};
}

}  // namespace vltrack
