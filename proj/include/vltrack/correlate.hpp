#pragma once

#include "vltrack/encoders.hpp"

namespace vltrack {

// Bias-free channel-adaptation projections for the category and the three
// dynamic attribute features. Bias-free so that zero text features leave the
// visual map untouched (the "1 +" identity term).
struct ProjectionParams {
    Mat category, color, material, texture;  // each C_T x C

    void visit(const std::string& prefix, const ParamVisitor& v);
    void set_zero();
    bool is_zero() const;
};

ProjectionParams init_projections(const ModelConfig& cfg, Rng& rng);

// Depthwise text-image correlation: g = 1 + Lc(Tc) + Lco(Tco) + Lm(Tm) + Lt(Tt),
// output[h,w,c] = g_c * V[h,w,c]. Output shape equals V's shape.
FeatureMap correlate(const FeatureMap& v, const Eigen::RowVectorXd& t_category,
                     const Eigen::RowVectorXd& t_color, const Eigen::RowVectorXd& t_material,
                     const Eigen::RowVectorXd& t_texture, ProjectionParams& proj);

Var correlate_var(Tape& t, const Var& v, const Var& t_category, const Var& t_color,
                  const Var& t_material, const Var& t_texture, ProjectionParams& proj);

}  // namespace vltrack
