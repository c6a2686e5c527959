#pragma once

#include <algorithm>
#include <cmath>

#include "vltrack/common.hpp"

namespace vltrack {

// Axis-aligned rectangle in pixels, top-left origin.
struct Box {
    double x = 0, y = 0, w = 0, h = 0;

    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double area() const { return w * h; }
    double x2() const { return x + w; }
    double y2() const { return y + h; }

    bool valid() const { return w > 0 && h > 0 && std::isfinite(x) && std::isfinite(y); }
};

inline double intersection_area(const Box& a, const Box& b) {
    double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    if (iw <= 0 || ih <= 0) return 0.0;
    return iw * ih;
}

inline double iou(const Box& a, const Box& b) {
    double inter = intersection_area(a, b);
    double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// Generalized IoU in (-1, 1]: IoU minus the hull penalty for non-overlap.
inline double giou(const Box& a, const Box& b) {
    if (!a.valid() || !b.valid()) throw Error("giou: degenerate box");
    double inter = intersection_area(a, b);
    double uni = a.area() + b.area() - inter;
    double hw = std::max(a.x2(), b.x2()) - std::min(a.x, b.x);
    double hh = std::max(a.y2(), b.y2()) - std::min(a.y, b.y);
    double hull = hw * hh;
    return inter / uni - (hull - uni) / hull;
}

inline double giou_loss(const Box& a, const Box& b) { return 1.0 - giou(a, b); }

inline double center_error(const Box& a, const Box& b) {
    return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

// Center error with each component normalized by the reference box size.
inline double normalized_center_error(const Box& pred, const Box& ref) {
    if (ref.w <= 0 || ref.h <= 0) throw Error("normalized_center_error: degenerate reference box");
    return std::hypot((pred.cx() - ref.cx()) / ref.w, (pred.cy() - ref.cy()) / ref.h);
}

inline Box clamp_box_to_frame(Box b, int frame_w, int frame_h, double min_side = 1.0) {
    b.w = std::clamp(b.w, min_side, double(frame_w));
    b.h = std::clamp(b.h, min_side, double(frame_h));
    b.x = std::clamp(b.x, 0.0, frame_w - b.w);
    b.y = std::clamp(b.y, 0.0, frame_h - b.h);
    return b;
}

}  // namespace vltrack
