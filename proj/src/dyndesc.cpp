#include "vltrack/dyndesc.hpp"

#include <cmath>

#include "vltrack/common.hpp"

namespace vltrack {

using namespace ad;

double attribute_difference(const Eigen::VectorXd& ref, const Eigen::VectorXd& cur) {
    if (ref.size() != cur.size())
        throw Error(cat("attribute_difference: mismatched value sets (", ref.size(), " vs ",
                        cur.size(), ")"));
    return (ref - cur).array().abs().sum();
}

AttributeWeights attribute_weights(const AttributeDifference& d) {
    if (d.color < 0 || d.material < 0 || d.texture < 0)
        throw Error("attribute_weights: negative difference");
    double m = std::max({-d.color, -d.material, -d.texture});
    double ec = std::exp(-d.color - m);
    double em = std::exp(-d.material - m);
    double et = std::exp(-d.texture - m);
    double z = ec + em + et;
    return {ec / z, em / z, et / z};
}

std::array<Eigen::RowVectorXd, 3> dynamic_attribute_features(const AttributeWeights& w,
                                                             const Eigen::RowVectorXd& t_color,
                                                             const Eigen::RowVectorXd& t_material,
                                                             const Eigen::RowVectorXd& t_texture) {
    if (t_color.size() != t_material.size() || t_color.size() != t_texture.size())
        throw Error("dynamic_attribute_features: feature dim mismatch");
    return {w.color * t_color, w.material * t_material, w.texture * t_texture};
}

Var attribute_difference_var(const Var& ref, const Var& cur) {
    if (value(ref).size() != value(cur).size())
        throw Error("attribute_difference: mismatched value sets");
    return sum(abs_(sub(ref, cur)));
}

Var attribute_weights_var(Tape& t, const Var& d_color, const Var& d_material,
                          const Var& d_texture) {
    for (const Var* d : {&d_color, &d_material, &d_texture})
        if (value(*d)(0, 0) < 0) throw Error("attribute_weights: negative difference");
    Var col = concat_rows({neg(d_color), neg(d_material), neg(d_texture)});  // 3x1
    return softmax_rows(transpose(col));                                     // 1x3
}

Var scale_feature_var(const Var& weight, const Var& feature) {
    return scale_by(feature, weight);
}

}  // namespace vltrack
