#include "vltrack/textconv.hpp"

#include <cmath>

namespace vltrack {

using namespace ad;

void PromptContextParams::visit(const std::string& prefix, const ParamVisitor& v) {
    v(prefix + ".ctx", ctx);
    v(prefix + ".meta_fc1.w", meta_fc1.w);
    v(prefix + ".meta_fc1.b", meta_fc1.b);
    v(prefix + ".meta_fc2.w", meta_fc2.w);
    v(prefix + ".meta_fc2.b", meta_fc2.b);
    v(prefix + ".tau", tau);
}

PromptContextParams init_prompt_context(const ModelConfig& cfg, Rng& rng) {
    int hidden = cfg.meta_hidden();
    if (hidden < 1) throw ConfigError("prompt context: d_img/16 must be >= 1");
    PromptContextParams p;
    p.ctx = Mat(cfg.prompt_tokens, cfg.d_tok);
    for (int i = 0; i < p.ctx.rows(); ++i)
        for (int j = 0; j < p.ctx.cols(); ++j) p.ctx(i, j) = 0.02 * rng.normal();
    auto affine_init = [&](int in, int out) {
        Mat w(in, out);
        double s = 1.0 / std::sqrt(double(in));
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < out; ++j) w(i, j) = s * rng.normal();
        return AffineParams{std::move(w), Mat::Zero(1, out)};
    };
    p.meta_fc1 = affine_init(cfg.d_img, hidden);
    p.meta_fc2 = affine_init(hidden, cfg.d_tok);
    p.tau = Mat::Constant(1, 1, cfg.tau_init);
    return p;
}

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

void validate_distribution(const Eigen::VectorXd& p, const char* who, double tol) {
    if (p.size() < 1) throw Error(cat(who, ": empty distribution"));
    double s = 0;
    for (int i = 0; i < p.size(); ++i) {
        if (!(p(i) >= 0.0)) throw Error(cat(who, ": negative probability at ", i));
        s += p(i);
    }
    if (std::abs(s - 1.0) > tol) throw Error(cat(who, ": probabilities sum to ", s));
}

// ---- tape path ----

Var meta_net_forward_var(Tape& t, PromptContextParams& p, const Var& x) {
    if (value(x).rows() != 1 || value(x).cols() != p.meta_fc1.w.rows())
        throw Error(cat("meta net: input must be 1x", p.meta_fc1.w.rows()));
    Var h = relu(affine(x, t.param(p.meta_fc1.w), t.param(p.meta_fc1.b)));
    return affine(h, t.param(p.meta_fc2.w), t.param(p.meta_fc2.b));
}

Var shifted_prompts_var(Tape& t, PromptContextParams& p, const Var& bias) {
    if (value(bias).cols() != p.ctx.cols()) throw Error("shifted prompts: bias dim mismatch");
    return add(t.param(p.ctx), broadcast_rows(bias, p.prompt_count()));
}

std::vector<Var> build_prompts_var(Tape& t, const Var& shifted, const LabelEmbeddings& labels) {
    std::vector<Var> out;
    out.reserve(labels.size());
    for (const auto& tokens : labels.tokens) {
        if (tokens.cols() != value(shifted).cols())
            throw Error("build_prompts: label token dim mismatch");
        out.push_back(concat_rows({shifted, t.leaf(tokens)}));
    }
    return out;
}

std::vector<Var> label_text_features_var(Tape& t, TextEncoderParams& enc,
                                         const std::vector<Var>& prompts) {
    std::vector<Var> out;
    out.reserve(prompts.size());
    for (const auto& pr : prompts) out.push_back(text_encoder_forward(t, enc, pr));
    return out;
}

Var classify_var(Tape& t, const Var& x, const std::vector<Var>& label_features, const Var& tau) {
    if (label_features.empty()) throw Error("classify: no labels");
    if (value(x).norm() < 1e-12) throw Error("classify: degenerate input: zero image feature");
    std::vector<Var> scores;
    scores.reserve(label_features.size());
    for (const auto& f : label_features) {
        if (value(f).norm() < 1e-12)
            throw Error("classify: degenerate input: zero encoded prompt");
        scores.push_back(cosine_similarity(x, f));
    }
    Var score_col = concat_rows(scores);     // N x 1
    Var inv_tau = div(t.scalar(1.0), tau);   // 1 x 1
    Var scaled = scale_by(score_col, inv_tau);
    return softmax_rows(transpose(scaled));  // 1 x N
}

namespace {

KindDescriptionVar describe_kind(Tape& t, TextEncoderParams& txt_enc, const Var& x,
                                 const Var& shifted, const Var& tau,
                                 const LabelEmbeddings& labels, VocabKind kind) {
    auto prompts = build_prompts_var(t, shifted, labels);
    auto feats = label_text_features_var(t, txt_enc, prompts);
    Var probs = classify_var(t, x, feats, tau);

    KindDescriptionVar out;
    out.probs = probs;
    Eigen::VectorXd pv = value(probs).row(0).transpose();
    out.argmax = argmax_lowest(pv);
    if (kind == VocabKind::classes) {
        Var stacked = concat_rows(feats);  // N x C_T
        out.feature = matmul(probs, stacked);
    } else {
        out.feature = feats[size_t(out.argmax)];
    }
    return out;
}

}  // namespace

DescriptionVars describe_var(Tape& t, ImageEncoderParams& img_enc, TextEncoderParams& txt_enc,
                             PromptContextParams& prompt, const Image& patch,
                             const EmbeddedVocabulary& ev, const ModelConfig& cfg) {
    Var x = image_encoder_forward(t, img_enc, patch, cfg);
    Var bias = meta_net_forward_var(t, prompt, x);
    Var shifted = shifted_prompts_var(t, prompt, bias);
    Var tau = t.param(prompt.tau);

    DescriptionVars out;
    for (VocabKind k : kAllKinds)
        out.kinds[size_t(k)] =
            describe_kind(t, txt_enc, x, shifted, tau, ev.embeddings[size_t(k)], k);
    return out;
}

// ---- value-level ----

Eigen::RowVectorXd meta_net_forward(PromptContextParams& p, const Eigen::RowVectorXd& x) {
    Tape t;
    return value(meta_net_forward_var(t, p, t.leaf(x))).row(0);
}

std::vector<Mat> build_prompts(PromptContextParams& p, const Eigen::RowVectorXd& bias,
                               const LabelEmbeddings& labels) {
    Tape t;
    Var shifted = shifted_prompts_var(t, p, t.leaf(bias));
    auto vars = build_prompts_var(t, shifted, labels);
    std::vector<Mat> out;
    out.reserve(vars.size());
    for (const auto& v : vars) out.push_back(value(v));
    return out;
}

std::vector<Eigen::RowVectorXd> label_text_features(TextEncoderParams& enc,
                                                    const std::vector<Mat>& prompts) {
    std::vector<Eigen::RowVectorXd> out;
    out.reserve(prompts.size());
    for (const auto& pr : prompts) out.push_back(encode_text_sequence(enc, pr));
    return out;
}

Eigen::VectorXd classify(const Eigen::RowVectorXd& x,
                         const std::vector<Eigen::RowVectorXd>& label_features, double tau) {
    Tape t;
    std::vector<Var> feats;
    feats.reserve(label_features.size());
    for (const auto& f : label_features) feats.push_back(t.leaf(f));
    Var p = classify_var(t, t.leaf(x), feats, t.scalar(tau));
    return value(p).row(0).transpose();
}

Eigen::RowVectorXd category_feature(const Eigen::VectorXd& probs,
                                    const std::vector<Eigen::RowVectorXd>& label_features) {
    if (size_t(probs.size()) != label_features.size())
        throw Error(cat("category_feature: ", probs.size(), " probabilities vs ",
                        label_features.size(), " features"));
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(label_features[0].size());
    for (int i = 0; i < probs.size(); ++i) out += probs(i) * label_features[size_t(i)];
    return out;
}

std::pair<Eigen::RowVectorXd, int> attribute_feature(
    const Eigen::VectorXd& probs, const std::vector<Eigen::RowVectorXd>& label_features) {
    if (size_t(probs.size()) != label_features.size() || label_features.empty())
        throw Error("attribute_feature: size mismatch");
    int idx = argmax_lowest(probs);
    return {label_features[size_t(idx)], idx};
}

TargetDescription describe(ImageEncoderParams& img_enc, TextEncoderParams& txt_enc,
                           PromptContextParams& prompt, const Image& patch,
                           const EmbeddedVocabulary& ev, const ModelConfig& cfg) {
    Tape t;
    DescriptionVars vars = describe_var(t, img_enc, txt_enc, prompt, patch, ev, cfg);
    TargetDescription out;
    out.patch_id = patch.content_hash();
    for (VocabKind k : kAllKinds) {
        const auto& kv = vars.kind(k);
        KindDescription kd;
        kd.probs = value(kv.probs).row(0).transpose();
        kd.argmax = kv.argmax;
        kd.feature = value(kv.feature).row(0);
        validate_distribution(kd.probs, kind_name(k));
        out.kinds[size_t(k)] = std::move(kd);
    }
    return out;
}

}  // namespace vltrack
