#pragma once

#include <string>
#include <vector>

#include "vltrack/common.hpp"

namespace vltrack {

struct Curve {
    std::string label;
    std::vector<double> x, y;
};

// Simple SVG line plot (axes, ticks, legend). y is expected in [0, 1].
void write_curve_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Curve>& curves);

// Success curve: fraction(iou > t) over the 21 thresholds.
Curve success_curve(const std::string& label, const std::vector<double>& ious);
// Precision curve: fraction(error <= t) for t = 0..max_px.
Curve precision_curve(const std::string& label, const std::vector<double>& center_errors,
                      int max_px = 50);

void write_curve_csv(const std::string& path, const std::vector<Curve>& curves);
std::vector<Curve> read_curve_csv(const std::string& path);

}  // namespace vltrack
