#pragma once

#include <array>

#include "vltrack/autodiff.hpp"

namespace vltrack {

// Drift between reference and current attribute distributions: L1 distance
// per attribute kind, each in [0, 2].
struct AttributeDifference {
    double color = 0, material = 0, texture = 0;
};

// softmax(-D): lower drift gets higher weight; always sums to 1.
struct AttributeWeights {
    double color = 0, material = 0, texture = 0;
};

double attribute_difference(const Eigen::VectorXd& ref, const Eigen::VectorXd& cur);
AttributeWeights attribute_weights(const AttributeDifference& d);

// Scales each attribute feature by its weight.
std::array<Eigen::RowVectorXd, 3> dynamic_attribute_features(const AttributeWeights& w,
                                                             const Eigen::RowVectorXd& t_color,
                                                             const Eigen::RowVectorXd& t_material,
                                                             const Eigen::RowVectorXd& t_texture);

// ---- tape path ----

ad::Var attribute_difference_var(const ad::Var& ref, const ad::Var& cur);  // 1x1
// Takes the three difference scalars, returns 1x3 weights.
ad::Var attribute_weights_var(ad::Tape& t, const ad::Var& d_color, const ad::Var& d_material,
                              const ad::Var& d_texture);
// weight: single entry of the 1x3 weights row; feature: 1xC.
ad::Var scale_feature_var(const ad::Var& weight, const ad::Var& feature);

}  // namespace vltrack
