#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "vltrack/common.hpp"

namespace vltrack::ad {

using Mat = Eigen::MatrixXd;

class Tape;

struct Node {
    Mat val;
    Mat grad;  // allocated lazily during backward
    Tape* tape = nullptr;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // accumulates into parents' grads
    Mat* bound = nullptr;                 // parameter leaves remember their storage

    bool has_grad() const { return grad.size() != 0; }
};

using Var = std::shared_ptr<Node>;

// Records a computation graph for one forward pass. Reverse-mode backward
// walks nodes in reverse creation order; create a fresh tape per pass.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = delete;  // nodes keep back-pointers to the tape

    Var leaf(Mat v);
    Var scalar(double v);
    // One node per distinct parameter matrix; repeated calls return the cached
    // node so gradients from all uses accumulate in one place.
    Var param(Mat& p);

    // root must be 1x1. Seeds d(root)/d(root) = 1 and propagates.
    void backward(const Var& root);

    // Gradient of the last backward() w.r.t. a parameter registered via param().
    // Zero matrix if the parameter never entered the graph's root path.
    Mat grad(const Mat& p) const;

    size_t size() const { return nodes_.size(); }

private:
    friend Var make_node(Tape& t, Mat val, std::vector<Var> parents,
                         std::function<void(Node&)> backprop);
    std::vector<Var> nodes_;
    std::unordered_map<const Mat*, Var> params_;
};

Var make_node(Tape& t, Mat val, std::vector<Var> parents, std::function<void(Node&)> backprop);

inline const Mat& value(const Var& v) { return v->val; }

// ---- elementwise / scalar ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);
Var scale_by(const Var& a, const Var& s);  // s is 1x1; out = a * s
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var exp_(const Var& a);
Var log_(const Var& a);
Var sqrt_(const Var& a);
Var square(const Var& a);
Var abs_(const Var& a);
Var cwise_max(const Var& a, const Var& b);  // ties route gradient to a
Var cwise_min(const Var& a, const Var& b);
// Pass-through gradient strictly inside [lo, hi], zero outside.
Var clamp(const Var& a, double lo, double hi);

// ---- structure ----
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var block(const Var& a, int r0, int c0, int rows, int cols);
Var concat_rows(const std::vector<Var>& parts);
Var broadcast_rows(const Var& row, int n);  // 1xC -> nxC

// ---- nonlinear structured ops ----
Var softmax_rows(const Var& a);
// Per-channel standardization over rows (spatial positions): each column is
// centered and scaled to unit variance.
Var spatial_norm(const Var& a, double eps = 1e-5);
// 3x3 convolution with zero padding over an HxW grid stored row-major as
// (H*W)xCin. w is (9*Cin)xCout, b is 1xCout.
Var conv3x3(const Var& x, const Var& w, const Var& b, int h, int wdt);

// ---- conveniences ----
Var affine(const Var& x, const Var& w, const Var& b);      // x*w + b (b broadcast over rows)
Var mean_rows(const Var& a);                               // nxC -> 1xC
Var dot(const Var& a, const Var& b);                       // sum(a .* b), any same shape
Var norm2(const Var& a);                                   // sqrt(sum(a.^2))
Var cosine_similarity(const Var& a, const Var& b);

}  // namespace vltrack::ad
