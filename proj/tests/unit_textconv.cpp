#include <doctest.h>

#include "oracles.hpp"
#include "vltrack/model.hpp"

using namespace vltrack;

namespace {

const char* kSmallVocab = R"({
  "classes": ["cat", "dog", "car"],
  "color": ["red", "green"],
  "material": ["wood", "metal"],
  "texture": ["smooth", "rough"]
})";

EmbeddedVocabulary small_embedded(const ModelConfig& cfg) {
    return embed_vocabulary(parse_vocabulary(kSmallVocab, "test"),
                            HashTokenEmbedder{cfg.d_tok, cfg.embed_seed});
}

Image random_image(Rng& rng, int size) {
    Image img{size, size};
    for (auto& v : img.data) v = rng.uniform();
    return img;
}

}  // namespace

TEST_CASE("meta net: zero weights produce the zero token") {
    ModelConfig cfg = toy_config();
    Rng rng(1);
    auto p = init_prompt_context(cfg, rng);
    p.meta_fc1.w.setZero();
    p.meta_fc1.b.setZero();
    p.meta_fc2.w.setZero();
    p.meta_fc2.b.setZero();
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Random(cfg.d_img);
    Eigen::RowVectorXd h = meta_net_forward(p, x);
    CHECK(h.size() == cfg.d_tok);
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("meta net: all-negative first layer leaves only the output bias") {
    ModelConfig cfg = toy_config();
    Rng rng(2);
    auto p = init_prompt_context(cfg, rng);
    p.meta_fc1.w.setZero();
    p.meta_fc1.b.setConstant(-1.0);  // rectifier kills everything
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Random(cfg.d_img);
    CHECK(meta_net_forward(p, x) == p.meta_fc2.b.row(0));
}

TEST_CASE("meta net honors the d_img/16 hidden width") {
    ModelConfig cfg = toy_config();
    Rng rng(3);
    auto p = init_prompt_context(cfg, rng);
    CHECK(p.meta_fc1.w.cols() == cfg.d_img / 16);
    CHECK(p.meta_fc1.w.cols() >= 1);
}

TEST_CASE("build_prompts: zero bias leaves context tokens unchanged") {
    ModelConfig cfg = toy_config();
    Rng rng(4);
    auto p = init_prompt_context(cfg, rng);
    auto ev = small_embedded(cfg);
    Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(cfg.d_tok);
    auto prompts = build_prompts(p, zero, ev.embeddings[size_t(VocabKind::classes)]);
    REQUIRE(prompts.size() == 3);
    for (const auto& m : prompts) CHECK(m.topRows(cfg.prompt_tokens) == p.ctx);
}

TEST_CASE("build_prompts: sequence length is K plus the label token count") {
    ModelConfig cfg = toy_config();
    cfg.prompt_tokens = 1;
    Rng rng(5);
    auto p = init_prompt_context(cfg, rng);
    LabelEmbeddings labels;
    labels.tokens.push_back(Mat::Ones(2, cfg.d_tok));  // two-token label
    Eigen::RowVectorXd bias = Eigen::RowVectorXd::Zero(cfg.d_tok);
    auto prompts = build_prompts(p, bias, labels);
    REQUIRE(prompts.size() == 1);
    CHECK(prompts[0].rows() == 3);
}

TEST_CASE("build_prompts: every prompt token is shifted by the same bias") {
    ModelConfig cfg = toy_config();
    Rng rng(6);
    auto p = init_prompt_context(cfg, rng);
    auto ev = small_embedded(cfg);
    Eigen::RowVectorXd bias = Eigen::RowVectorXd::Random(cfg.d_tok);
    auto prompts = build_prompts(p, bias, ev.embeddings[size_t(VocabKind::color)]);
    for (const auto& m : prompts)
        for (int k = 0; k < cfg.prompt_tokens; ++k)
            CHECK((m.row(k) - p.ctx.row(k)).isApprox(bias, 1e-12));
}

TEST_CASE("classify: identical prompts split the probability evenly") {
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Random(8);
    Eigen::RowVectorXd f = Eigen::RowVectorXd::Random(8);
    Eigen::VectorXd p = classify(x, {f, f}, 0.5);
    CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("classify: cosine scores (1,0) at tau=1 match the softmax oracle") {
    Eigen::RowVectorXd x(4), t1(4), t2(4);
    x << 1, 0, 0, 0;
    t1 << 2, 0, 0, 0;  // cos = 1
    t2 << 0, 3, 0, 0;  // cos = 0
    Eigen::VectorXd p = classify(x, {t1, t2}, 1.0);
    auto want = oracle::softmax({1.0, 0.0});
    CHECK(p(0) == doctest::Approx(want[0]).epsilon(1e-6));
    CHECK(p(1) == doctest::Approx(want[1]).epsilon(1e-6));
    CHECK(p(0) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(p(1) == doctest::Approx(0.2689).epsilon(1e-4));
}

TEST_CASE("classify: temperature to zero approaches one-hot at the argmax") {
    Eigen::RowVectorXd x(3), a(3), b(3), c(3);
    x << 1, 0.2, 0;
    a << 1, 0, 0;
    b << 0, 1, 0;
    c << 1, 1, 0;
    Eigen::VectorXd p = classify(x, {a, b, c}, 1e-3);
    int best = argmax_lowest(p);
    CHECK(p(best) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("classify is invariant to positive rescaling of the image feature") {
    Rng rng(7);
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Random(16);
    std::vector<Eigen::RowVectorXd> feats;
    for (int i = 0; i < 5; ++i) feats.push_back(Eigen::RowVectorXd::Random(16));
    Eigen::VectorXd p1 = classify(x, feats, 0.07);
    for (double k : {1e-3, 0.5, 7.0, 1e4}) {
        Eigen::VectorXd pk = classify((k * x).eval(), feats, 0.07);
        CHECK((p1 - pk).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("classify rejects degenerate inputs") {
    Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(4);
    Eigen::RowVectorXd ok = Eigen::RowVectorXd::Ones(4);
    CHECK_THROWS_WITH_AS((void)classify(zero, {ok}, 1.0), doctest::Contains("degenerate"), Error);
    CHECK_THROWS_WITH_AS((void)classify(ok, {zero}, 1.0), doctest::Contains("degenerate"), Error);
}

TEST_CASE("category_feature pools by probability") {
    Eigen::RowVectorXd t1(2), t2(2);
    t1 << 1, 0;
    t2 << 0, 1;
    Eigen::VectorXd onehot(2);
    onehot << 1, 0;
    CHECK(category_feature(onehot, {t1, t2}) == t1);

    Eigen::VectorXd uniform(2);
    uniform << 0.5, 0.5;
    Eigen::RowVectorXd mean = category_feature(uniform, {t1, t2});
    CHECK(mean(0) == doctest::Approx(0.5));
    CHECK(mean(1) == doctest::Approx(0.5));

    Eigen::VectorXd p(2);
    p << 0.25, 0.75;
    Eigen::RowVectorXd mixed = category_feature(p, {t1, t2});
    CHECK(mixed(0) == doctest::Approx(0.25));
    CHECK(mixed(1) == doctest::Approx(0.75));
}

TEST_CASE("category_feature is linear in the distribution") {
    Rng rng(8);
    std::vector<Eigen::RowVectorXd> feats;
    for (int i = 0; i < 4; ++i) feats.push_back(Eigen::RowVectorXd::Random(6));
    Eigen::VectorXd p(4), q(4);
    p << 0.1, 0.2, 0.3, 0.4;
    q << 0.4, 0.3, 0.2, 0.1;
    double alpha = 0.3;
    Eigen::VectorXd mix = alpha * p + (1 - alpha) * q;
    Eigen::RowVectorXd lhs = category_feature(mix, feats);
    Eigen::RowVectorXd rhs = alpha * category_feature(p, feats) + (1 - alpha) * category_feature(q, feats);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("category_feature rejects length mismatches") {
    Eigen::VectorXd p(2);
    p << 0.5, 0.5;
    CHECK_THROWS_AS((void)category_feature(p, {Eigen::RowVectorXd::Ones(3)}), Error);
}

TEST_CASE("attribute_feature picks the argmax with ties to the lowest index") {
    Eigen::RowVectorXd t1 = Eigen::RowVectorXd::Constant(3, 1.0);
    Eigen::RowVectorXd t2 = Eigen::RowVectorXd::Constant(3, 2.0);
    Eigen::VectorXd p(2);
    p << 0.1, 0.9;
    auto [f, idx] = attribute_feature(p, {t1, t2});
    CHECK(idx == 1);
    CHECK(f == t2);

    p << 0.5, 0.5;
    auto [ft, idt] = attribute_feature(p, {t1, t2});
    CHECK(idt == 0);
    CHECK(ft == t1);

    Eigen::VectorXd single(1);
    single << 1.0;
    auto [fs, ids] = attribute_feature(single, {t2});
    CHECK(ids == 0);
    CHECK(fs == t2);
}

TEST_CASE("describe is deterministic with valid distributions per kind") {
    ModelConfig cfg = toy_config();
    TrackModel m = TrackModel::init(cfg, 9);
    auto ev = small_embedded(cfg);
    Rng imgs(10);
    Image patch = random_image(imgs, cfg.template_size);

    TargetDescription d1 = m.describe(patch, ev);
    TargetDescription d2 = m.describe(patch, ev);
    for (VocabKind k : kAllKinds) {
        CHECK(d1.kind(k).probs == d2.kind(k).probs);
        CHECK(d1.kind(k).argmax == d2.kind(k).argmax);
        CHECK(d1.kind(k).feature == d2.kind(k).feature);
        CHECK(d1.kind(k).probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d1.kind(k).argmax == argmax_lowest(d1.kind(k).probs));
    }
    CHECK(d1.patch_id == d2.patch_id);
}

TEST_CASE("describe: the category feature equals the probability pooling of label features") {
    ModelConfig cfg = toy_config();
    TrackModel m = TrackModel::init(cfg, 11);
    auto ev = small_embedded(cfg);
    Rng imgs(12);
    Image patch = random_image(imgs, cfg.template_size);
    TargetDescription d = m.describe(patch, ev);

    // reconstruct the label features the same way describe builds them
    Eigen::RowVectorXd x = encode_image(m.img_enc, patch, cfg);
    Eigen::RowVectorXd bias = meta_net_forward(m.prompt, x);
    auto prompts = build_prompts(m.prompt, bias, ev.embeddings[size_t(VocabKind::classes)]);
    auto feats = label_text_features(m.txt_enc, prompts);
    Eigen::RowVectorXd pooled = category_feature(d.kind(VocabKind::classes).probs, feats);
    CHECK((pooled - d.kind(VocabKind::classes).feature).cwiseAbs().maxCoeff() < 1e-6);

    // attribute features equal the winning label's feature
    auto cprompts = build_prompts(m.prompt, bias, ev.embeddings[size_t(VocabKind::color)]);
    auto cfeats = label_text_features(m.txt_enc, cprompts);
    const auto& ck = d.kind(VocabKind::color);
    CHECK(ck.feature == cfeats[size_t(ck.argmax)]);
}

TEST_CASE("label_text_features: one feature per label, equal labels equal features") {
    ModelConfig cfg = toy_config();
    Rng rng(13);
    auto txt = init_text_encoder(cfg, rng);
    auto prompt = init_prompt_context(cfg, rng);
    LabelEmbeddings labels;
    Mat tok = Mat::Ones(1, cfg.d_tok);
    labels.tokens = {tok, tok, 2.0 * tok};
    Eigen::RowVectorXd bias = Eigen::RowVectorXd::Zero(cfg.d_tok);
    auto feats = label_text_features(txt, build_prompts(prompt, bias, labels));
    REQUIRE(feats.size() == 3);
    CHECK(feats[0] == feats[1]);
    CHECK(feats[0] != feats[2]);
}

TEST_CASE("classify gradients w.r.t. temperature and prompt tokens match finite differences") {
    ModelConfig cfg = toy_config();
    cfg.d_tok = 6;
    Rng rng(14);
    auto txt = init_text_encoder(cfg, rng);
    auto prompt = init_prompt_context(cfg, rng);
    prompt.tau(0, 0) = 0.3;

    LabelEmbeddings labels;
    for (int i = 0; i < 3; ++i) {
        Mat tok(2, cfg.d_tok);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < cfg.d_tok; ++c) tok(r, c) = rng.normal();
        labels.tokens.push_back(tok);
    }
    Eigen::RowVectorXd x(cfg.d_img);
    for (int i = 0; i < cfg.d_img; ++i) x(i) = rng.normal();
    Eigen::RowVectorXd probe(3);
    probe << 0.2, -1.3, 0.7;  // random linear functional of the distribution

    auto forward = [&](ad::Tape& t) {
        ad::Var vx = t.leaf(x);
        ad::Var bias = meta_net_forward_var(t, prompt, vx);
        ad::Var shifted = shifted_prompts_var(t, prompt, bias);
        auto pvars = build_prompts_var(t, shifted, labels);
        auto feats = label_text_features_var(t, txt, pvars);
        ad::Var probs = classify_var(t, vx, feats, t.param(prompt.tau));
        return ad::dot(probs, t.leaf(probe));
    };
    auto scalar = [&]() {
        ad::Tape t;
        return ad::value(forward(t))(0, 0);
    };

    ad::Tape t;
    t.backward(forward(t));
    CHECK(oracle::max_grad_rel_err(scalar, prompt.tau, t.grad(prompt.tau)) < 1e-4);
    CHECK(oracle::max_grad_rel_err(scalar, prompt.ctx, t.grad(prompt.ctx)) < 1e-4);
}
