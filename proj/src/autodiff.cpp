#include "vltrack/autodiff.hpp"

#include <cmath>

namespace vltrack::ad {

namespace {

void ensure_grad(Node& n) {
    if (!n.has_grad()) n.grad = Mat::Zero(n.val.rows(), n.val.cols());
}

void accumulate(const Var& parent, const Mat& g) {
    ensure_grad(*parent);
    parent->grad += g;
}

Tape& tape_of(const Var& a) {
    if (!a || !a->tape) throw Error("autodiff: variable without tape");
    return *a->tape;
}

void check_same_tape(const Var& a, const Var& b) {
    if (a->tape != b->tape) throw Error("autodiff: variables from different tapes");
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a->val.rows() != b->val.rows() || a->val.cols() != b->val.cols())
        throw Error(cat("autodiff: ", op, ": shape mismatch (", a->val.rows(), "x", a->val.cols(),
                        " vs ", b->val.rows(), "x", b->val.cols(), ")"));
}

}  // namespace

Var make_node(Tape& t, Mat val, std::vector<Var> parents, std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    n->tape = &t;
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
    t.nodes_.push_back(n);
    return n;
}

Var Tape::leaf(Mat v) { return make_node(*this, std::move(v), {}, nullptr); }

Var Tape::scalar(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return leaf(std::move(m));
}

Var Tape::param(Mat& p) {
    auto it = params_.find(&p);
    if (it != params_.end()) return it->second;
    Var v = leaf(p);
    v->bound = &p;
    params_.emplace(&p, v);
    return v;
}

void Tape::backward(const Var& root) {
    if (root->tape != this) throw Error("autodiff: backward on foreign tape");
    if (root->val.rows() != 1 || root->val.cols() != 1)
        throw Error("autodiff: backward root must be a scalar");
    for (auto& n : nodes_)
        if (n->has_grad()) n->grad.setZero();
    ensure_grad(*root);
    root->grad(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        Node& n = **it;
        if (!n.has_grad() || !n.backprop) continue;
        n.backprop(n);
    }
}

Mat Tape::grad(const Mat& p) const {
    auto it = params_.find(&p);
    if (it == params_.end() || !it->second->has_grad()) return Mat::Zero(p.rows(), p.cols());
    return it->second->grad;
}

// ---- elementwise ----

Var add(const Var& a, const Var& b) {
    check_same_tape(a, b);
    check_same_shape(a, b, "add");
    return make_node(tape_of(a), a->val + b->val, {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad);
        accumulate(n.parents[1], n.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_tape(a, b);
    check_same_shape(a, b, "sub");
    return make_node(tape_of(a), a->val - b->val, {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad);
        accumulate(n.parents[1], -n.grad);
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_tape(a, b);
    check_same_shape(a, b, "mul");
    return make_node(tape_of(a), a->val.cwiseProduct(b->val), {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad.cwiseProduct(n.parents[1]->val));
        accumulate(n.parents[1], n.grad.cwiseProduct(n.parents[0]->val));
    });
}

Var div(const Var& a, const Var& b) {
    check_same_tape(a, b);
    check_same_shape(a, b, "div");
    return make_node(tape_of(a), a->val.cwiseQuotient(b->val), {a, b}, [](Node& n) {
        const Mat& bv = n.parents[1]->val;
        accumulate(n.parents[0], n.grad.cwiseQuotient(bv));
        accumulate(n.parents[1], -n.grad.cwiseProduct(n.val).cwiseQuotient(bv));
    });
}

Var neg(const Var& a) { return mul_scalar(a, -1.0); }

Var add_scalar(const Var& a, double s) {
    return make_node(tape_of(a), (a->val.array() + s).matrix(), {a},
                     [](Node& n) { accumulate(n.parents[0], n.grad); });
}

Var mul_scalar(const Var& a, double s) {
    return make_node(tape_of(a), a->val * s, {a},
                     [s](Node& n) { accumulate(n.parents[0], n.grad * s); });
}

Var scale_by(const Var& a, const Var& s) {
    check_same_tape(a, s);
    if (s->val.rows() != 1 || s->val.cols() != 1) throw Error("autodiff: scale_by: s must be 1x1");
    return make_node(tape_of(a), a->val * s->val(0, 0), {a, s}, [](Node& n) {
        accumulate(n.parents[0], n.grad * n.parents[1]->val(0, 0));
        Mat ds(1, 1);
        ds(0, 0) = n.grad.cwiseProduct(n.parents[0]->val).sum();
        accumulate(n.parents[1], ds);
    });
}

Var relu(const Var& a) {
    return make_node(tape_of(a), a->val.cwiseMax(0.0), {a}, [](Node& n) {
        Mat mask = (n.parents[0]->val.array() > 0.0).cast<double>().matrix();
        accumulate(n.parents[0], n.grad.cwiseProduct(mask));
    });
}

Var sigmoid(const Var& a) {
    Mat y = (1.0 / (1.0 + (-a->val.array()).exp())).matrix();
    return make_node(tape_of(a), std::move(y), {a}, [](Node& n) {
        Mat d = n.val.array() * (1.0 - n.val.array());
        accumulate(n.parents[0], n.grad.cwiseProduct(d));
    });
}

Var exp_(const Var& a) {
    return make_node(tape_of(a), a->val.array().exp().matrix(), {a},
                     [](Node& n) { accumulate(n.parents[0], n.grad.cwiseProduct(n.val)); });
}

Var log_(const Var& a) {
    return make_node(tape_of(a), a->val.array().log().matrix(), {a}, [](Node& n) {
        accumulate(n.parents[0], n.grad.cwiseQuotient(n.parents[0]->val));
    });
}

Var sqrt_(const Var& a) {
    return make_node(tape_of(a), a->val.array().sqrt().matrix(), {a}, [](Node& n) {
        accumulate(n.parents[0], (n.grad.array() * 0.5 / n.val.array()).matrix());
    });
}

Var square(const Var& a) {
    return make_node(tape_of(a), a->val.array().square().matrix(), {a}, [](Node& n) {
        accumulate(n.parents[0], (n.grad.array() * 2.0 * n.parents[0]->val.array()).matrix());
    });
}

Var abs_(const Var& a) {
    return make_node(tape_of(a), a->val.array().abs().matrix(), {a}, [](Node& n) {
        Mat sign = n.parents[0]->val.array().sign().matrix();
        accumulate(n.parents[0], n.grad.cwiseProduct(sign));
    });
}

Var cwise_max(const Var& a, const Var& b) {
    check_same_tape(a, b);
    check_same_shape(a, b, "cwise_max");
    return make_node(tape_of(a), a->val.cwiseMax(b->val), {a, b}, [](Node& n) {
        Mat to_a = (n.parents[0]->val.array() >= n.parents[1]->val.array()).cast<double>().matrix();
        accumulate(n.parents[0], n.grad.cwiseProduct(to_a));
        accumulate(n.parents[1], n.grad.cwiseProduct((1.0 - to_a.array()).matrix().eval()));
    });
}

Var cwise_min(const Var& a, const Var& b) {
    check_same_tape(a, b);
    check_same_shape(a, b, "cwise_min");
    return make_node(tape_of(a), a->val.cwiseMin(b->val), {a, b}, [](Node& n) {
        Mat to_a = (n.parents[0]->val.array() <= n.parents[1]->val.array()).cast<double>().matrix();
        accumulate(n.parents[0], n.grad.cwiseProduct(to_a));
        accumulate(n.parents[1], n.grad.cwiseProduct((1.0 - to_a.array()).matrix().eval()));
    });
}

Var clamp(const Var& a, double lo, double hi) {
    return make_node(tape_of(a), a->val.array().max(lo).min(hi).matrix(), {a}, [lo, hi](Node& n) {
        const auto& x = n.parents[0]->val.array();
        Mat mask = ((x > lo) && (x < hi)).cast<double>().matrix();
        accumulate(n.parents[0], n.grad.cwiseProduct(mask));
    });
}

// ---- structure ----

Var matmul(const Var& a, const Var& b) {
    check_same_tape(a, b);
    if (a->val.cols() != b->val.rows())
        throw Error(cat("autodiff: matmul: inner dims ", a->val.cols(), " vs ", b->val.rows()));
    return make_node(tape_of(a), a->val * b->val, {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad * n.parents[1]->val.transpose());
        accumulate(n.parents[1], n.parents[0]->val.transpose() * n.grad);
    });
}

Var transpose(const Var& a) {
    return make_node(tape_of(a), a->val.transpose(), {a},
                     [](Node& n) { accumulate(n.parents[0], n.grad.transpose()); });
}

Var sum(const Var& a) {
    Mat s(1, 1);
    s(0, 0) = a->val.sum();
    return make_node(tape_of(a), std::move(s), {a}, [](Node& n) {
        accumulate(n.parents[0],
                   Mat::Constant(n.parents[0]->val.rows(), n.parents[0]->val.cols(), n.grad(0, 0)));
    });
}

Var mean(const Var& a) { return mul_scalar(sum(a), 1.0 / double(a->val.size())); }

Var block(const Var& a, int r0, int c0, int rows, int cols) {
    if (r0 < 0 || c0 < 0 || r0 + rows > a->val.rows() || c0 + cols > a->val.cols())
        throw Error("autodiff: block: out of range");
    return make_node(tape_of(a), a->val.block(r0, c0, rows, cols), {a},
                     [r0, c0, rows, cols](Node& n) {
                         ensure_grad(*n.parents[0]);
                         n.parents[0]->grad.block(r0, c0, rows, cols) += n.grad;
                     });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw Error("autodiff: concat_rows: empty");
    Eigen::Index cols = parts[0]->val.cols(), rows = 0;
    for (const auto& p : parts) {
        check_same_tape(parts[0], p);
        if (p->val.cols() != cols) throw Error("autodiff: concat_rows: column mismatch");
        rows += p->val.rows();
    }
    Mat out(rows, cols);
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.middleRows(r, p->val.rows()) = p->val;
        r += p->val.rows();
    }
    return make_node(tape_of(parts[0]), std::move(out), parts, [](Node& n) {
        Eigen::Index r = 0;
        for (auto& p : n.parents) {
            accumulate(p, n.grad.middleRows(r, p->val.rows()));
            r += p->val.rows();
        }
    });
}

Var broadcast_rows(const Var& row, int n) {
    if (row->val.rows() != 1) throw Error("autodiff: broadcast_rows: input must be 1xC");
    Mat out = row->val.replicate(n, 1);
    return make_node(tape_of(row), std::move(out), {row}, [](Node& n_) {
        accumulate(n_.parents[0], n_.grad.colwise().sum());
    });
}

// ---- nonlinear structured ----

Var softmax_rows(const Var& a) {
    Mat y = a->val;
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        Eigen::ArrayXd row = y.row(r).array();
        row -= row.maxCoeff();
        Eigen::ArrayXd e = row.exp();
        y.row(r) = (e / e.sum()).matrix();
    }
    return make_node(tape_of(a), std::move(y), {a}, [](Node& n) {
        Mat dx(n.val.rows(), n.val.cols());
        for (Eigen::Index r = 0; r < n.val.rows(); ++r) {
            Eigen::ArrayXd p = n.val.row(r).array();
            Eigen::ArrayXd g = n.grad.row(r).array();
            double gp = (g * p).sum();
            dx.row(r) = (p * (g - gp)).matrix();
        }
        accumulate(n.parents[0], dx);
    });
}

Var spatial_norm(const Var& a, double eps) {
    Eigen::Index n = a->val.rows(), c = a->val.cols();
    if (n < 1) throw Error("autodiff: spatial_norm: empty input");
    Eigen::RowVectorXd mu = a->val.colwise().mean();
    Mat centered = a->val.rowwise() - mu;
    Eigen::RowVectorXd var = centered.array().square().colwise().mean().matrix();
    Eigen::RowVectorXd inv_sd = (var.array() + eps).sqrt().inverse().matrix();
    Mat y = (centered.array().rowwise() * inv_sd.array()).matrix();
    return make_node(tape_of(a), std::move(y), {a}, [inv_sd, nd = double(n), c](Node& node) {
        // dL/dx = inv_sd * (g - mean(g) - y * mean(g .* y)) per column
        Mat dx(node.val.rows(), c);
        for (Eigen::Index j = 0; j < c; ++j) {
            Eigen::ArrayXd g = node.grad.col(j).array();
            Eigen::ArrayXd y = node.val.col(j).array();
            double gm = g.sum() / nd;
            double gym = (g * y).sum() / nd;
            dx.col(j) = (inv_sd(j) * (g - gm - y * gym)).matrix();
        }
        accumulate(node.parents[0], dx);
    });
}

namespace {

// im2col for 3x3 zero-padded convolution: (H*W) x (9*Cin)
Mat im2col3x3(const Mat& x, int h, int w) {
    Eigen::Index cin = x.cols();
    Mat col = Mat::Zero(Eigen::Index(h) * w, 9 * cin);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            Eigen::Index p = Eigen::Index(y) * w + xx;
            int k = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx, ++k) {
                    int sy = y + dy, sx = xx + dx;
                    if (sy < 0 || sx < 0 || sy >= h || sx >= w) continue;
                    col.block(p, k * cin, 1, cin) = x.row(Eigen::Index(sy) * w + sx);
                }
        }
    return col;
}

}  // namespace

Var conv3x3(const Var& x, const Var& w, const Var& b, int h, int wdt) {
    check_same_tape(x, w);
    check_same_tape(x, b);
    Eigen::Index cin = x->val.cols(), cout = w->val.cols();
    if (x->val.rows() != Eigen::Index(h) * wdt)
        throw Error(cat("autodiff: conv3x3: grid ", h, "x", wdt, " vs rows ", x->val.rows()));
    if (w->val.rows() != 9 * cin)
        throw Error(cat("autodiff: conv3x3: weight rows ", w->val.rows(), " want ", 9 * cin));
    if (b->val.rows() != 1 || b->val.cols() != cout)
        throw Error("autodiff: conv3x3: bias must be 1xCout");

    auto col = std::make_shared<Mat>(im2col3x3(x->val, h, wdt));
    Mat out = (*col * w->val).rowwise() + b->val.row(0);
    return make_node(tape_of(x), std::move(out), {x, w, b}, [col, h, wdt, cin](Node& n) {
        accumulate(n.parents[1], col->transpose() * n.grad);
        accumulate(n.parents[2], n.grad.colwise().sum());
        // scatter dcol back onto the input grid
        Mat dcol = n.grad * n.parents[1]->val.transpose();
        ensure_grad(*n.parents[0]);
        Mat& dx = n.parents[0]->grad;
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < wdt; ++xx) {
                Eigen::Index p = Eigen::Index(y) * wdt + xx;
                int k = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dxo = -1; dxo <= 1; ++dxo, ++k) {
                        int sy = y + dy, sx = xx + dxo;
                        if (sy < 0 || sx < 0 || sy >= h || sx >= wdt) continue;
                        dx.row(Eigen::Index(sy) * wdt + sx) += dcol.block(p, k * cin, 1, cin);
                    }
            }
    });
}

// ---- conveniences ----

Var affine(const Var& x, const Var& w, const Var& b) {
    Var y = matmul(x, w);
    if (b->val.rows() != 1 || b->val.cols() != y->val.cols())
        throw Error("autodiff: affine: bias shape");
    return add(y, broadcast_rows(b, int(y->val.rows())));
}

Var mean_rows(const Var& a) {
    Mat ones = Mat::Constant(1, a->val.rows(), 1.0 / double(a->val.rows()));
    return matmul(tape_of(a).leaf(std::move(ones)), a);
}

Var dot(const Var& a, const Var& b) { return sum(mul(a, b)); }

Var norm2(const Var& a) { return sqrt_(sum(square(a))); }

Var cosine_similarity(const Var& a, const Var& b) {
    return div(dot(a, b), mul(norm2(a), norm2(b)));
}

}  // namespace vltrack::ad
