#include "vltrack/encoders.hpp"

#include <cmath>

namespace vltrack {

namespace {

Mat init_weight(Rng& rng, int rows, int cols) {
    Mat m(rows, cols);
    double scale = 1.0 / std::sqrt(double(rows));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

Mat init_small(Rng& rng, int rows, int cols, double sd = 0.02) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = sd * rng.normal();
    return m;
}

AffineParams init_affine(Rng& rng, int in, int out) {
    return {init_weight(rng, in, out), Mat::Zero(1, out)};
}

void visit_affine(AffineParams& a, const std::string& prefix, const ParamVisitor& v) {
    v(prefix + ".w", a.w);
    v(prefix + ".b", a.b);
}

}  // namespace

void ImageEncoderParams::visit(const std::string& prefix, const ParamVisitor& v) {
    visit_affine(patch, prefix + ".patch", v);
    visit_affine(fc1, prefix + ".fc1", v);
    visit_affine(fc2, prefix + ".fc2", v);
}

void TextEncoderParams::visit(const std::string& prefix, const ParamVisitor& v) {
    visit_affine(proj, prefix + ".proj", v);
}

void BackboneParams::visit(const std::string& prefix, const ParamVisitor& v) {
    visit_affine(patch, prefix + ".patch", v);
    v(prefix + ".pos_template", pos_template);
    v(prefix + ".pos_search", pos_search);
    for (size_t i = 0; i < blocks.size(); ++i) {
        std::string bp = cat(prefix, ".block", i);
        v(bp + ".wq", blocks[i].wq);
        v(bp + ".wk", blocks[i].wk);
        v(bp + ".wv", blocks[i].wv);
        v(bp + ".wo", blocks[i].wo);
    }
}

ImageEncoderParams init_image_encoder(const ModelConfig& cfg, Rng& rng) {
    int pdim = 3 * cfg.stride * cfg.stride;
    ImageEncoderParams p;
    p.patch = init_affine(rng, pdim, cfg.d_img);
    p.fc1 = init_affine(rng, cfg.d_img, cfg.d_img);
    p.fc2 = init_affine(rng, cfg.d_img, cfg.d_img);
    return p;
}

TextEncoderParams init_text_encoder(const ModelConfig& cfg, Rng& rng) {
    TextEncoderParams p;
    p.proj = init_affine(rng, cfg.d_tok, cfg.c_text);
    return p;
}

BackboneParams init_backbone(const ModelConfig& cfg, Rng& rng) {
    int pdim = 3 * cfg.stride * cfg.stride;
    int nt = cfg.template_grid() * cfg.template_grid();
    int ns = cfg.search_grid() * cfg.search_grid();
    BackboneParams p;
    p.patch = init_affine(rng, pdim, cfg.c_vis);
    p.pos_template = init_small(rng, nt, cfg.c_vis);
    p.pos_search = init_small(rng, ns, cfg.c_vis);
    for (auto& blk : p.blocks) {
        blk.wq = init_weight(rng, cfg.c_vis, cfg.c_vis);
        blk.wk = init_weight(rng, cfg.c_vis, cfg.c_vis);
        blk.wv = init_weight(rng, cfg.c_vis, cfg.c_vis);
        blk.wo = init_weight(rng, cfg.c_vis, cfg.c_vis);
    }
    return p;
}

Mat patchify(const Image& img, int patch) {
    if (img.width % patch != 0 || img.height % patch != 0)
        throw Error(cat("patchify: image ", img.width, "x", img.height,
                        " not divisible by patch ", patch));
    int gw = img.width / patch, gh = img.height / patch;
    Mat out(Eigen::Index(gw) * gh, Eigen::Index(3) * patch * patch);
    for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px) {
            Eigen::Index row = Eigen::Index(py) * gw + px;
            int col = 0;
            for (int y = 0; y < patch; ++y)
                for (int x = 0; x < patch; ++x)
                    for (int c = 0; c < 3; ++c)
                        out(row, col++) = img.at(px * patch + x, py * patch + y, c);
        }
    return out;
}

namespace {

void check_resolution(const Image& img, int want, const char* who) {
    if (img.width != want || img.height != want)
        throw Error(cat(who, ": expected ", want, "x", want, " input, got ", img.width, "x",
                        img.height));
}

Var attention_block(Tape& t, AttentionBlockParams& blk, const Var& x) {
    using namespace ad;
    Var q = matmul(x, t.param(blk.wq));
    Var k = matmul(x, t.param(blk.wk));
    Var v = matmul(x, t.param(blk.wv));
    double inv_sqrt_d = 1.0 / std::sqrt(double(value(q).cols()));
    Var attn = softmax_rows(mul_scalar(matmul(q, transpose(k)), inv_sqrt_d));
    return add(x, matmul(matmul(attn, v), t.param(blk.wo)));
}

}  // namespace

Var image_encoder_forward(Tape& t, ImageEncoderParams& p, const Image& patch,
                          const ModelConfig& cfg) {
    using namespace ad;
    check_resolution(patch, cfg.template_size, "image encoder");
    Var tokens = t.leaf(patchify(patch, cfg.stride));
    Var embedded = affine(tokens, t.param(p.patch.w), t.param(p.patch.b));
    Var pooled = mean_rows(embedded);
    Var h = relu(affine(pooled, t.param(p.fc1.w), t.param(p.fc1.b)));
    return affine(h, t.param(p.fc2.w), t.param(p.fc2.b));
}

Var text_encoder_forward(Tape& t, TextEncoderParams& p, const Var& tokens) {
    using namespace ad;
    if (value(tokens).rows() < 1) throw Error("text encoder: empty token sequence");
    if (value(tokens).cols() != p.proj.w.rows())
        throw Error(cat("text encoder: token dim ", value(tokens).cols(), ", expected ",
                        p.proj.w.rows()));
    return affine(mean_rows(tokens), t.param(p.proj.w), t.param(p.proj.b));
}

Var backbone_forward_var(Tape& t, BackboneParams& p, const Image& tmpl, const Image& search,
                         const ModelConfig& cfg, bool use_template) {
    using namespace ad;
    check_resolution(search, cfg.search_size, "backbone (search)");
    int ns = cfg.search_grid() * cfg.search_grid();
    Var s_tok = affine(t.leaf(patchify(search, cfg.stride)), t.param(p.patch.w), t.param(p.patch.b));
    s_tok = add(s_tok, t.param(p.pos_search));

    Var x = s_tok;
    if (use_template) {
        check_resolution(tmpl, cfg.template_size, "backbone (template)");
        Var t_tok =
            affine(t.leaf(patchify(tmpl, cfg.stride)), t.param(p.patch.w), t.param(p.patch.b));
        t_tok = add(t_tok, t.param(p.pos_template));
        x = concat_rows({t_tok, s_tok});
    }
    for (auto& blk : p.blocks) x = attention_block(t, blk, x);
    int offset = int(value(x).rows()) - ns;
    return block(x, offset, 0, ns, cfg.c_vis);
}

Eigen::RowVectorXd encode_image(ImageEncoderParams& p, const Image& patch,
                                const ModelConfig& cfg) {
    Tape t;
    return ad::value(image_encoder_forward(t, p, patch, cfg)).row(0);
}

Eigen::RowVectorXd encode_text_sequence(TextEncoderParams& p, const Mat& tokens) {
    Tape t;
    return ad::value(text_encoder_forward(t, p, t.leaf(tokens))).row(0);
}

FeatureMap backbone_forward(BackboneParams& p, const Image& tmpl, const Image& search,
                            const ModelConfig& cfg, bool use_template) {
    Tape t;
    Var v = backbone_forward_var(t, p, tmpl, search, cfg, use_template);
    FeatureMap fm;
    fm.h = fm.w = cfg.search_grid();
    fm.stride = cfg.stride;
    fm.data = ad::value(v);
    return fm;
}

}  // namespace vltrack
