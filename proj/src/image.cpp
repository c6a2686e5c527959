#include "vltrack/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vltrack {

std::array<double, 3> Image::mean_color() const {
    std::array<double, 3> m{0, 0, 0};
    size_t n = size_t(width) * height;
    if (n == 0) return m;
    for (size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) m[c] += data[i * 3 + c];
    for (int c = 0; c < 3; ++c) m[c] /= double(n);
    return m;
}

std::array<double, 3> sample_bilinear(const Image& img, double px, double py,
                                      const std::array<double, 3>& fill) {
    // Neighboring pixel centers around (px, py).
    double fx = px - 0.5, fy = py - 0.5;
    int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
    double ax = fx - x0, ay = fy - y0;

    auto tap = [&](int x, int y) -> std::array<double, 3> {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) return fill;
        return {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
    };
    auto p00 = tap(x0, y0), p10 = tap(x0 + 1, y0), p01 = tap(x0, y0 + 1), p11 = tap(x0 + 1, y0 + 1);

    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        double top = (1 - ax) * p00[c] + ax * p10[c];
        double bot = (1 - ax) * p01[c] + ax * p11[c];
        out[c] = (1 - ay) * top + ay * bot;
    }
    return out;
}

void fill_rect(Image& img, const Box& b, const std::array<double, 3>& color) {
    int x0 = std::max(0, int(std::lround(b.x)));
    int y0 = std::max(0, int(std::lround(b.y)));
    int x1 = std::min(img.width, int(std::lround(b.x2())));
    int y1 = std::min(img.height, int(std::lround(b.y2())));
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
}

void fill_ellipse(Image& img, const Box& b, const std::array<double, 3>& color) {
    double rx = b.w / 2.0, ry = b.h / 2.0;
    double cx = b.cx(), cy = b.cy();
    int x0 = std::max(0, int(std::floor(b.x)));
    int y0 = std::max(0, int(std::floor(b.y)));
    int x1 = std::min(img.width, int(std::ceil(b.x2())));
    int y1 = std::min(img.height, int(std::ceil(b.y2())));
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
            if (dx * dx + dy * dy <= 1.0)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
        }
}

Image read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(cat("read_ppm: cannot open ", path));
    std::string magic;
    f >> magic;
    if (magic != "P6") throw Error(cat("read_ppm: ", path, ": expected P6, got '", magic, "'"));
    auto next_int = [&]() {
        // Skip whitespace and '#' comment lines between header fields.
        int ch;
        while ((ch = f.peek()) != EOF) {
            if (ch == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(ch)) {
                f.get();
            } else {
                break;
            }
        }
        long v = -1;
        f >> v;
        if (!f || v < 0) throw Error(cat("read_ppm: ", path, ": malformed header"));
        return v;
    };
    long w = next_int(), h = next_int(), maxval = next_int();
    if (maxval != 255) throw Error(cat("read_ppm: ", path, ": unsupported maxval ", maxval));
    f.get();  // single whitespace after header
    Image img{int(w), int(h)};
    std::vector<unsigned char> raw(size_t(w) * h * 3);
    f.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (size_t(f.gcount()) != raw.size()) throw Error(cat("read_ppm: ", path, ": truncated pixel data"));
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
    return img;
}

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(cat("write_ppm: cannot open ", path));
    f << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double v = std::clamp(img.data[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    f.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size()));
    if (!f) throw Error(cat("write_ppm: failed writing ", path));
}

}  // namespace vltrack
