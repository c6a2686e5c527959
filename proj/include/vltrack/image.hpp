#pragma once

#include <array>
#include <string>
#include <vector>

#include "vltrack/common.hpp"
#include "vltrack/geometry.hpp"

namespace vltrack {

// Interleaved RGB image, values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // height*width*3

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(size_t(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }

    std::array<double, 3> mean_color() const;
    uint64_t content_hash() const { return fnv1a64(data.data(), data.size() * sizeof(double)); }
};

// Bilinear sample at continuous position (px, py); positions outside the frame
// blend toward `fill`. Pixel centers sit at integer + 0.5.
std::array<double, 3> sample_bilinear(const Image& img, double px, double py,
                                      const std::array<double, 3>& fill);

void fill_rect(Image& img, const Box& b, const std::array<double, 3>& color);
void fill_ellipse(Image& img, const Box& b, const std::array<double, 3>& color);

// Binary PPM (P6), 8 bits per channel.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& img);

}  // namespace vltrack
