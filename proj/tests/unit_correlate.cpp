#include <doctest.h>

#include "oracles.hpp"
#include "vltrack/correlate.hpp"

using namespace vltrack;

namespace {

FeatureMap random_map(Rng& rng, int h, int w, int c) {
    FeatureMap fm;
    fm.h = h;
    fm.w = w;
    fm.stride = 16;
    fm.data = Mat(h * w, c);
    for (int i = 0; i < fm.data.rows(); ++i)
        for (int j = 0; j < c; ++j) fm.data(i, j) = rng.normal();
    return fm;
}

ProjectionParams zero_proj(int c_text, int c_vis) {
    ProjectionParams p{Mat::Zero(c_text, c_vis), Mat::Zero(c_text, c_vis),
                       Mat::Zero(c_text, c_vis), Mat::Zero(c_text, c_vis)};
    return p;
}

}  // namespace

TEST_CASE("zero projections make correlate the exact identity") {
    Rng rng(1);
    FeatureMap v = random_map(rng, 4, 4, 6);
    auto proj = zero_proj(5, 6);
    Eigen::RowVectorXd f = Eigen::RowVectorXd::Random(5);
    FeatureMap out = correlate(v, f, f, f, f, proj);
    CHECK(out.data == v.data);  // bit-exact: the "1 +" identity term
    CHECK(out.h == v.h);
    CHECK(out.w == v.w);
}

TEST_CASE("the kernel scales channels") {
    FeatureMap v;
    v.h = v.w = 2;
    v.stride = 16;
    v.data = Mat::Ones(4, 3);
    auto proj = zero_proj(2, 3);
    // category projection alone produces g = 1 + (1, -0.5, 0) = (2, 0.5, 1)
    proj.category.row(0) << 1.0, -0.5, 0.0;
    Eigen::RowVectorXd tc(2), zero(2);
    tc << 1, 0;
    zero << 0, 0;
    FeatureMap out = correlate(v, tc, zero, zero, zero, proj);
    for (int cell = 0; cell < 4; ++cell) {
        CHECK(out.data(cell, 0) == doctest::Approx(2.0));
        CHECK(out.data(cell, 1) == doctest::Approx(0.5));
        CHECK(out.data(cell, 2) == doctest::Approx(1.0));
    }
}

TEST_CASE("correlate is linear in the text features") {
    Rng rng(2);
    FeatureMap v = random_map(rng, 3, 3, 8);
    ProjectionParams proj{Mat::Random(4, 8), Mat::Random(4, 8), Mat::Random(4, 8),
                          Mat::Random(4, 8)};
    Eigen::RowVectorXd tc = Eigen::RowVectorXd::Random(4), tco = Eigen::RowVectorXd::Random(4),
                       tm = Eigen::RowVectorXd::Random(4), tt = Eigen::RowVectorXd::Random(4);
    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(4);
    double alpha = 0.37;

    Mat base = correlate(v, z, z, z, z, proj).data;
    Mat full = correlate(v, tc, tco, tm, tt, proj).data;
    Mat scaled = correlate(v, (alpha * tc).eval(), (alpha * tco).eval(), (alpha * tm).eval(),
                           (alpha * tt).eval(), proj)
                     .data;
    CHECK(((scaled - base) - alpha * (full - base)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correlate is linear in the feature map") {
    Rng rng(3);
    FeatureMap v1 = random_map(rng, 3, 3, 8);
    FeatureMap v2 = random_map(rng, 3, 3, 8);
    ProjectionParams proj{Mat::Random(4, 8), Mat::Random(4, 8), Mat::Random(4, 8),
                          Mat::Random(4, 8)};
    Eigen::RowVectorXd tc = Eigen::RowVectorXd::Random(4);

    FeatureMap vsum = v1;
    vsum.data = v1.data + v2.data;
    Mat lhs = correlate(vsum, tc, tc, tc, tc, proj).data;
    Mat rhs = correlate(v1, tc, tc, tc, tc, proj).data + correlate(v2, tc, tc, tc, tc, proj).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("channel mismatch is rejected") {
    Rng rng(4);
    FeatureMap v = random_map(rng, 2, 2, 6);
    auto proj = zero_proj(5, 7);  // maps to 7 channels, map has 6
    Eigen::RowVectorXd f = Eigen::RowVectorXd::Random(5);
    CHECK_THROWS_AS((void)correlate(v, f, f, f, f, proj), Error);

    auto proj_ok = zero_proj(5, 6);
    Eigen::RowVectorXd bad = Eigen::RowVectorXd::Random(4);
    CHECK_THROWS_AS((void)correlate(v, bad, f, f, f, proj_ok), Error);
}

TEST_CASE("correlate gradients w.r.t. projections match finite differences") {
    Rng rng(5);
    FeatureMap v = random_map(rng, 3, 3, 5);
    ProjectionParams proj{Mat::Random(4, 5), Mat::Random(4, 5), Mat::Random(4, 5),
                          Mat::Random(4, 5)};
    Eigen::RowVectorXd tc = Eigen::RowVectorXd::Random(4), tco = Eigen::RowVectorXd::Random(4),
                       tm = Eigen::RowVectorXd::Random(4), tt = Eigen::RowVectorXd::Random(4);
    Mat probe = Mat::Random(9, 5);

    auto scalar = [&]() {
        ad::Tape t;
        auto out = correlate_var(t, t.leaf(v.data), t.leaf(tc), t.leaf(tco), t.leaf(tm),
                                 t.leaf(tt), proj);
        return ad::value(ad::dot(out, t.leaf(probe)))(0, 0);
    };
    ad::Tape t;
    auto out = correlate_var(t, t.leaf(v.data), t.leaf(tc), t.leaf(tco), t.leaf(tm), t.leaf(tt),
                             proj);
    t.backward(ad::dot(out, t.leaf(probe)));
    CHECK(oracle::max_grad_rel_err(scalar, proj.category, t.grad(proj.category)) < 1e-4);
    CHECK(oracle::max_grad_rel_err(scalar, proj.color, t.grad(proj.color)) < 1e-4);
    CHECK(oracle::max_grad_rel_err(scalar, proj.material, t.grad(proj.material)) < 1e-4);
    CHECK(oracle::max_grad_rel_err(scalar, proj.texture, t.grad(proj.texture)) < 1e-4);
}
