#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vltrack/common.hpp"
#include "vltrack/dyndesc.hpp"

using namespace vltrack;

namespace {

Eigen::VectorXd random_distribution(Rng& rng, int n) {
    Eigen::VectorXd p(n);
    double s = 0;
    for (int i = 0; i < n; ++i) {
        p(i) = rng.uniform() + 1e-6;
        s += p(i);
    }
    return p / s;
}

}  // namespace

TEST_CASE("attribute_difference basics") {
    Eigen::VectorXd a(2), b(2), c(2), d(2);
    a << 1, 0;
    b << 0, 1;
    c << 0.6, 0.4;
    d << 0.5, 0.5;
    CHECK(attribute_difference(a, a) == 0.0);
    CHECK(attribute_difference(a, b) == doctest::Approx(2.0));
    CHECK(attribute_difference(c, d) == doctest::Approx(0.2));

    Eigen::VectorXd wrong(3);
    CHECK_THROWS_AS((void)attribute_difference(a, wrong), Error);
}

TEST_CASE("attribute_difference is a metric on distributions") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        int n = int(rng.uniform_int(2, 8));
        auto p = random_distribution(rng, n);
        auto q = random_distribution(rng, n);
        auto r = random_distribution(rng, n);
        double pq = attribute_difference(p, q);
        CHECK(pq >= 0.0);
        CHECK(pq == attribute_difference(q, p));
        CHECK(attribute_difference(p, r) <= pq + attribute_difference(q, r) + 1e-12);
    }
}

TEST_CASE("attribute_weights: zero drift gives the symmetric weights") {
    auto w = attribute_weights({0, 0, 0});
    CHECK(w.color == doctest::Approx(1.0 / 3));
    CHECK(w.material == doctest::Approx(1.0 / 3));
    CHECK(w.texture == doctest::Approx(1.0 / 3));
}

TEST_CASE("attribute_weights: softmax oracle at D = (0, ln2, ln2)") {
    auto w = attribute_weights({0, std::log(2.0), std::log(2.0)});
    CHECK(w.color == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(w.material == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(w.texture == doctest::Approx(0.25).epsilon(1e-6));

    auto want = oracle::softmax({-0.0, -std::log(2.0), -std::log(2.0)});
    CHECK(w.color == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(w.material == doctest::Approx(want[1]).epsilon(1e-12));
}

TEST_CASE("attribute_weights: more drift means less weight, sums to one, rejects negatives") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        AttributeDifference d{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)};
        auto w = attribute_weights(d);
        CHECK(w.color + w.material + w.texture == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(w.color >= 0.0);
        CHECK(w.material >= 0.0);
        CHECK(w.texture >= 0.0);
        if (d.color > d.material) CHECK(w.color < w.material);
        if (d.color < d.material) CHECK(w.color > w.material);
    }
    CHECK_THROWS_AS((void)attribute_weights({-0.1, 0, 0}), Error);
}

TEST_CASE("dynamic_attribute_features scales each feature by its weight") {
    Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(4);
    AttributeWeights w{1.0 / 3, 1.0 / 3, 1.0 / 3};
    auto [tc, tm, tt] = dynamic_attribute_features(w, ones, ones, ones);
    CHECK(tc(0) == doctest::Approx(1.0 / 3));
    CHECK(tm(2) == doctest::Approx(1.0 / 3));
    CHECK(tt(3) == doctest::Approx(1.0 / 3));

    auto [z, m2, t2] = dynamic_attribute_features({0.0, 0.5, 0.5}, ones, ones, ones);
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);

    // positive homogeneity of the norm
    Rng rng(5);
    Eigen::RowVectorXd f = Eigen::RowVectorXd::Random(6);
    AttributeWeights wr = attribute_weights({rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)});
    auto [a, b, c] = dynamic_attribute_features(wr, f, f, f);
    CHECK(a.norm() == doctest::Approx(wr.color * f.norm()).epsilon(1e-12));
    CHECK(b.norm() == doctest::Approx(wr.material * f.norm()).epsilon(1e-12));
    CHECK(c.norm() == doctest::Approx(wr.texture * f.norm()).epsilon(1e-12));

    Eigen::RowVectorXd bad = Eigen::RowVectorXd::Ones(5);
    CHECK_THROWS_AS((void)dynamic_attribute_features(w, ones, bad, ones), Error);
}

TEST_CASE("tape path agrees with the value path") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        int n = int(rng.uniform_int(2, 6));
        auto ref_c = random_distribution(rng, n), cur_c = random_distribution(rng, n);
        auto ref_m = random_distribution(rng, n), cur_m = random_distribution(rng, n);
        auto ref_t = random_distribution(rng, n), cur_t = random_distribution(rng, n);

        AttributeDifference d{attribute_difference(ref_c, cur_c),
                              attribute_difference(ref_m, cur_m),
                              attribute_difference(ref_t, cur_t)};
        auto w = attribute_weights(d);

        ad::Tape t;
        auto dv_c = attribute_difference_var(t.leaf(ref_c), t.leaf(cur_c));
        auto dv_m = attribute_difference_var(t.leaf(ref_m), t.leaf(cur_m));
        auto dv_t = attribute_difference_var(t.leaf(ref_t), t.leaf(cur_t));
        auto wv = attribute_weights_var(t, dv_c, dv_m, dv_t);
        CHECK(ad::value(dv_c)(0, 0) == doctest::Approx(d.color).epsilon(1e-12));
        CHECK(ad::value(wv)(0, 0) == doctest::Approx(w.color).epsilon(1e-12));
        CHECK(ad::value(wv)(0, 1) == doctest::Approx(w.material).epsilon(1e-12));
        CHECK(ad::value(wv)(0, 2) == doctest::Approx(w.texture).epsilon(1e-12));

        Eigen::RowVectorXd feat = Eigen::RowVectorXd::Random(5);
        auto scaled = scale_feature_var(ad::block(wv, 0, 0, 1, 1), t.leaf(feat));
        CHECK((ad::value(scaled).row(0) - w.color * feat).cwiseAbs().maxCoeff() < 1e-12);
    }
}
