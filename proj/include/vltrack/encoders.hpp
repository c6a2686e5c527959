#pragma once

#include <array>
#include <functional>
#include <string>

#include "vltrack/autodiff.hpp"
#include "vltrack/config.hpp"
#include "vltrack/image.hpp"

namespace vltrack {

using ad::Mat;
using ad::Tape;
using ad::Var;

using ParamVisitor = std::function<void(const std::string&, Mat&)>;

// H x W x C feature grid over the search crop, stored row-major as (H*W) x C.
struct FeatureMap {
    int h = 0, w = 0;
    int stride = 0;  // pixels per cell relative to the crop it came from
    Mat data;

    int channels() const { return int(data.cols()); }
    int cells() const { return h * w; }
};

struct AffineParams {
    Mat w, b;  // y = x * w + b, row-vector convention
};

// patchify(16x16) -> affine embed -> mean pool -> 2-layer perceptron
struct ImageEncoderParams {
    AffineParams patch, fc1, fc2;
    void visit(const std::string& prefix, const ParamVisitor& v);
};

// mean pool tokens -> affine
struct TextEncoderParams {
    AffineParams proj;
    void visit(const std::string& prefix, const ParamVisitor& v);
};

struct AttentionBlockParams {
    Mat wq, wk, wv, wo;
};

// shared patch embed + positional embeddings, joint self-attention over the
// concatenated template+search tokens, search tokens kept as the feature map
struct BackboneParams {
    AffineParams patch;
    Mat pos_template, pos_search;
    std::array<AttentionBlockParams, 2> blocks;
    void visit(const std::string& prefix, const ParamVisitor& v);
};

ImageEncoderParams init_image_encoder(const ModelConfig& cfg, Rng& rng);
TextEncoderParams init_text_encoder(const ModelConfig& cfg, Rng& rng);
BackboneParams init_backbone(const ModelConfig& cfg, Rng& rng);

// Non-overlapping patch grid of an image as a (n_patches x 3*p*p) matrix,
// patches in row-major order, pixels row-major and channel-interleaved.
Mat patchify(const Image& img, int patch);

// ---- tape forwards (training and inference share these) ----

Var image_encoder_forward(Tape& t, ImageEncoderParams& p, const Image& patch,
                          const ModelConfig& cfg);
Var text_encoder_forward(Tape& t, TextEncoderParams& p, const Var& tokens);
// Feature map over the search region; set use_template=false to exclude the
// template tokens from the joint attention (ablation switch).
Var backbone_forward_var(Tape& t, BackboneParams& p, const Image& tmpl, const Image& search,
                         const ModelConfig& cfg, bool use_template = true);

// ---- value-level contracts ----

Eigen::RowVectorXd encode_image(ImageEncoderParams& p, const Image& patch, const ModelConfig& cfg);
Eigen::RowVectorXd encode_text_sequence(TextEncoderParams& p, const Mat& tokens);
FeatureMap backbone_forward(BackboneParams& p, const Image& tmpl, const Image& search,
                            const ModelConfig& cfg, bool use_template = true);

}  // namespace vltrack
