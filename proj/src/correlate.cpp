#include "vltrack/correlate.hpp"

namespace vltrack {

using namespace ad;

void ProjectionParams::visit(const std::string& prefix, const ParamVisitor& v) {
    v(prefix + ".category", category);
    v(prefix + ".color", color);
    v(prefix + ".material", material);
    v(prefix + ".texture", texture);
}

void ProjectionParams::set_zero() {
    category.setZero();
    color.setZero();
    material.setZero();
    texture.setZero();
}

bool ProjectionParams::is_zero() const {
    return category.isZero(0) && color.isZero(0) && material.isZero(0) && texture.isZero(0);
}

ProjectionParams init_projections(const ModelConfig& cfg, Rng& rng) {
    // Initialized large enough that the text kernel visibly modulates the map
    // from the start, so the head trains against text-conditioned features.
    auto init = [&]() {
        Mat m(cfg.c_text, cfg.c_vis);
        double s = 0.01 / std::sqrt(double(cfg.c_text));
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) m(i, j) = s * rng.normal();
        return m;
    };
    return {init(), init(), init(), init()};
}

Var correlate_var(Tape& t, const Var& v, const Var& t_category, const Var& t_color,
                  const Var& t_material, const Var& t_texture, ProjectionParams& proj) {
    Eigen::Index c = value(v).cols();
    if (proj.category.cols() != c)
        throw Error(cat("correlate: projection maps to ", proj.category.cols(), " channels, map has ", c));
    for (const Var* f : {&t_category, &t_color, &t_material, &t_texture})
        if (value(*f).rows() != 1 || value(*f).cols() != proj.category.rows())
            throw Error("correlate: text feature dim mismatch");

    Var g = matmul(t_category, t.param(proj.category));
    g = add(g, matmul(t_color, t.param(proj.color)));
    g = add(g, matmul(t_material, t.param(proj.material)));
    g = add(g, matmul(t_texture, t.param(proj.texture)));
    g = add_scalar(g, 1.0);                       // identity kernel term
    return mul(v, broadcast_rows(g, int(value(v).rows())));
}

FeatureMap correlate(const FeatureMap& v, const Eigen::RowVectorXd& t_category,
                     const Eigen::RowVectorXd& t_color, const Eigen::RowVectorXd& t_material,
                     const Eigen::RowVectorXd& t_texture, ProjectionParams& proj) {
    Tape t;
    Var out = correlate_var(t, t.leaf(v.data), t.leaf(t_category), t.leaf(t_color),
                            t.leaf(t_material), t.leaf(t_texture), proj);
    return FeatureMap{v.h, v.w, v.stride, value(out)};
}

}  // namespace vltrack
