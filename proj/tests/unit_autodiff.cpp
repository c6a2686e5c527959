#include <doctest.h>

#include "oracles.hpp"
#include "vltrack/autodiff.hpp"
#include "vltrack/common.hpp"

using namespace vltrack;
using namespace vltrack::ad;

namespace {

Mat random_mat(Rng& rng, int r, int c, double scale = 1.0) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

}  // namespace

TEST_CASE("forward values of basic ops") {
    Tape t;
    Mat a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 5, 6, 7, 8;
    auto va = t.leaf(a), vb = t.leaf(b);
    CHECK(value(add(va, vb))(0, 0) == 6);
    CHECK(value(mul(va, vb))(1, 1) == 32);
    CHECK(value(matmul(va, vb))(0, 0) == doctest::Approx(19));
    CHECK(value(sum(va))(0, 0) == 10);
    CHECK(value(mean(va))(0, 0) == 2.5);
    CHECK(value(transpose(va))(0, 1) == 3);
}

TEST_CASE("softmax rows sums to one and matches oracle") {
    Rng rng(7);
    Tape t;
    Mat s = random_mat(rng, 3, 5);
    auto p = softmax_rows(t.leaf(s));
    for (int r = 0; r < 3; ++r) {
        CHECK(value(p).row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
        std::vector<double> row(s.row(r).data(), s.row(r).data() + 5);
        // Eigen row of a row-major slice: copy explicitly
        for (int j = 0; j < 5; ++j) row[size_t(j)] = s(r, j);
        auto want = oracle::softmax(row);
        for (int j = 0; j < 5; ++j) CHECK(value(p)(r, j) == doctest::Approx(want[size_t(j)]).epsilon(1e-12));
    }
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(42);
    // scalar loss built from a pile of ops exercising every primitive
    Mat w1 = random_mat(rng, 4, 3), w2 = random_mat(rng, 3, 3), bias = random_mat(rng, 1, 3);
    Mat x = random_mat(rng, 5, 4);

    auto loss = [&]() {
        Tape t;
        auto vx = t.leaf(x);
        auto h = affine(vx, t.param(w1), t.param(bias));
        h = relu(h);
        h = matmul(h, t.param(w2));
        h = sigmoid(h);
        auto p = softmax_rows(h);
        auto q = spatial_norm(add(p, exp_(mul_scalar(h, 0.1))));
        auto r = mul(q, q);
        auto s = sqrt_(add_scalar(square(sub(r, p)), 1.0));
        auto m = cwise_max(s, abs_(mul_scalar(p, 0.7)));
        return value(mean(m))(0, 0);
    };

    // analytic grads via one tape
    Tape t;
    auto vx = t.leaf(x);
    auto h = affine(vx, t.param(w1), t.param(bias));
    h = relu(h);
    h = matmul(h, t.param(w2));
    h = sigmoid(h);
    auto p = softmax_rows(h);
    auto q = spatial_norm(add(p, exp_(mul_scalar(h, 0.1))));
    auto r = mul(q, q);
    auto s = sqrt_(add_scalar(square(sub(r, p)), 1.0));
    auto m = cwise_max(s, abs_(mul_scalar(p, 0.7)));
    t.backward(mean(m));

    CHECK(oracle::max_grad_rel_err(loss, w1, t.grad(w1)) < 1e-5);
    CHECK(oracle::max_grad_rel_err(loss, w2, t.grad(w2)) < 1e-5);
    CHECK(oracle::max_grad_rel_err(loss, bias, t.grad(bias)) < 1e-5);
}

TEST_CASE("conv3x3 gradient and shape") {
    Rng rng(3);
    int H = 4, W = 5, cin = 3, cout = 2;
    Mat x = random_mat(rng, H * W, cin);
    Mat w = random_mat(rng, 9 * cin, cout, 0.5);
    Mat b = random_mat(rng, 1, cout);

    auto loss = [&]() {
        Tape t;
        auto y = conv3x3(t.param(x), t.param(w), t.param(b), H, W);
        return value(sum(square(y)))(0, 0);
    };
    Tape t;
    auto y = conv3x3(t.param(x), t.param(w), t.param(b), H, W);
    CHECK(value(y).rows() == H * W);
    CHECK(value(y).cols() == cout);
    t.backward(sum(square(y)));
    CHECK(oracle::max_grad_rel_err(loss, x, t.grad(x)) < 1e-6);
    CHECK(oracle::max_grad_rel_err(loss, w, t.grad(w)) < 1e-6);
    CHECK(oracle::max_grad_rel_err(loss, b, t.grad(b)) < 1e-6);
}

TEST_CASE("slicing, concat and broadcast gradients") {
    Rng rng(11);
    Mat a = random_mat(rng, 3, 4), brow = random_mat(rng, 1, 4);
    auto loss = [&]() {
        Tape t;
        auto va = t.param(a);
        auto top = block(va, 0, 0, 1, 4);
        auto rest = block(va, 1, 0, 2, 4);
        auto joined = concat_rows({rest, broadcast_rows(t.param(brow), 2), top});
        return value(sum(mul(joined, joined)))(0, 0);
    };
    Tape t;
    auto va = t.param(a);
    auto top = block(va, 0, 0, 1, 4);
    auto rest = block(va, 1, 0, 2, 4);
    auto joined = concat_rows({rest, broadcast_rows(t.param(brow), 2), top});
    t.backward(sum(mul(joined, joined)));
    CHECK(oracle::max_grad_rel_err(loss, a, t.grad(a)) < 1e-6);
    CHECK(oracle::max_grad_rel_err(loss, brow, t.grad(brow)) < 1e-6);
}

TEST_CASE("cosine similarity value and gradient") {
    Rng rng(5);
    Mat a = random_mat(rng, 1, 6), b = random_mat(rng, 1, 6);
    Tape t;
    auto c = cosine_similarity(t.param(a), t.param(b));
    double direct = a.row(0).dot(b.row(0)) / (a.norm() * b.norm());
    CHECK(value(c)(0, 0) == doctest::Approx(direct).epsilon(1e-12));
    t.backward(c);
    auto loss = [&]() {
        Tape tt;
        return value(cosine_similarity(tt.param(a), tt.param(b)))(0, 0);
    };
    CHECK(oracle::max_grad_rel_err(loss, a, t.grad(a)) < 1e-6);
    CHECK(oracle::max_grad_rel_err(loss, b, t.grad(b)) < 1e-6);
}

TEST_CASE("parameter reuse accumulates gradient once per use") {
    Mat p(1, 1);
    p << 2.0;
    Tape t;
    auto vp = t.param(p);
    auto y = mul(vp, vp);  // y = p^2, dy/dp = 2p = 4
    t.backward(sum(y));
    CHECK(t.grad(p)(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("shape errors are reported") {
    Tape t;
    auto a = t.leaf(Mat::Zero(2, 2));
    auto b = t.leaf(Mat::Zero(3, 2));
    CHECK_THROWS_AS((void)add(a, b), Error);
    CHECK_THROWS_AS((void)matmul(a, b), Error);
    CHECK_THROWS_AS(t.backward(a), Error);  // non-scalar root
}
