#pragma once

#include <array>
#include <utility>
#include <vector>

#include "vltrack/encoders.hpp"
#include "vltrack/vocab.hpp"

namespace vltrack {

// Learnable conversion context: K prompt tokens, the Meta-Net producing an
// image-conditioned shift added to every prompt token, and the softmax
// temperature. One context is shared across all four vocabulary kinds.
struct PromptContextParams {
    Mat ctx;  // K x d_tok
    AffineParams meta_fc1;  // d_img -> d_img/16
    AffineParams meta_fc2;  // d_img/16 -> d_tok
    Mat tau;  // 1x1, kept positive during training

    int prompt_count() const { return int(ctx.rows()); }
    void visit(const std::string& prefix, const ParamVisitor& v);
};

PromptContextParams init_prompt_context(const ModelConfig& cfg, Rng& rng);

// Per-kind probabilities, winning label, and pooled text feature.
struct KindDescription {
    Eigen::VectorXd probs;
    int argmax = 0;
    Eigen::RowVectorXd feature;  // category: probability-pooled; attributes: winner's feature
};

struct TargetDescription {
    std::array<KindDescription, 4> kinds;  // indexed by VocabKind
    uint64_t patch_id = 0;

    const KindDescription& kind(VocabKind k) const { return kinds[size_t(k)]; }
};

// Tape-level description (training path): per-kind distribution and feature
// variables; argmax indices are extracted values.
struct KindDescriptionVar {
    Var probs;  // 1 x N
    int argmax = 0;
    Var feature;  // 1 x C_T
};

struct DescriptionVars {
    std::array<KindDescriptionVar, 4> kinds;

    const KindDescriptionVar& kind(VocabKind k) const { return kinds[size_t(k)]; }
};

// ---- tape building blocks ----

Var meta_net_forward_var(Tape& t, PromptContextParams& p, const Var& x);
// Shared shifted prompt block (K x d_tok): every context token plus the bias.
Var shifted_prompts_var(Tape& t, PromptContextParams& p, const Var& bias);
// Per-label prompt sequences m_i: shifted prompts followed by the label tokens.
std::vector<Var> build_prompts_var(Tape& t, const Var& shifted, const LabelEmbeddings& labels);
std::vector<Var> label_text_features_var(Tape& t, TextEncoderParams& enc,
                                         const std::vector<Var>& prompts);
// Cosine-similarity softmax over labels at temperature tau.
Var classify_var(Tape& t, const Var& x, const std::vector<Var>& label_features, const Var& tau);

DescriptionVars describe_var(Tape& t, ImageEncoderParams& img_enc, TextEncoderParams& txt_enc,
                             PromptContextParams& prompt, const Image& patch,
                             const EmbeddedVocabulary& ev, const ModelConfig& cfg);

// ---- value-level contracts ----

Eigen::RowVectorXd meta_net_forward(PromptContextParams& p, const Eigen::RowVectorXd& x);
std::vector<Mat> build_prompts(PromptContextParams& p, const Eigen::RowVectorXd& bias,
                               const LabelEmbeddings& labels);
std::vector<Eigen::RowVectorXd> label_text_features(TextEncoderParams& enc,
                                                    const std::vector<Mat>& prompts);
Eigen::VectorXd classify(const Eigen::RowVectorXd& x,
                         const std::vector<Eigen::RowVectorXd>& label_features, double tau);
Eigen::RowVectorXd category_feature(const Eigen::VectorXd& probs,
                                    const std::vector<Eigen::RowVectorXd>& label_features);
std::pair<Eigen::RowVectorXd, int> attribute_feature(
    const Eigen::VectorXd& probs, const std::vector<Eigen::RowVectorXd>& label_features);

TargetDescription describe(ImageEncoderParams& img_enc, TextEncoderParams& txt_enc,
                           PromptContextParams& prompt, const Image& patch,
                           const EmbeddedVocabulary& ev, const ModelConfig& cfg);

// Lowest index among maximal entries.
int argmax_lowest(const Eigen::VectorXd& v);

void validate_distribution(const Eigen::VectorXd& p, const char* who, double tol = 1e-6);

}  // namespace vltrack
