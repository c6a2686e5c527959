#include "vltrack/head.hpp"

#include <cmath>

namespace vltrack {

using namespace ad;

void HeadParams::visit(const std::string& prefix, const ParamVisitor& v) {
    auto visit_branch = [&](HeadBranchParams& br, const std::string& name) {
        for (size_t i = 0; i < br.blocks.size(); ++i) {
            std::string bp = cat(prefix, ".", name, ".conv", i);
            v(bp + ".w", br.blocks[i].w);
            v(bp + ".b", br.blocks[i].b);
            v(bp + ".gamma", br.blocks[i].gamma);
            v(bp + ".beta", br.blocks[i].beta);
        }
        v(cat(prefix, ".", name, ".out.w"), br.out.w);
        v(cat(prefix, ".", name, ".out.b"), br.out.b);
    };
    visit_branch(score, "score");
    visit_branch(offset, "offset");
    visit_branch(size, "size");
}

namespace {

constexpr int kConvLayers = 4;

std::vector<int> branch_dims(int c) {
    std::vector<int> dims{c};
    for (int i = 0; i < kConvLayers; ++i) dims.push_back(std::max(8, dims.back() / 2));
    return dims;
}

HeadBranchParams init_branch(const ModelConfig& cfg, Rng& rng, int out_channels) {
    auto dims = branch_dims(cfg.c_vis);
    HeadBranchParams br;
    for (int i = 0; i < kConvLayers; ++i) {
        int cin = dims[size_t(i)], cout = dims[size_t(i) + 1];
        ConvBlockParams blk;
        blk.w = Mat(9 * cin, cout);
        double s = 1.0 / std::sqrt(double(9 * cin));
        for (int r = 0; r < blk.w.rows(); ++r)
            for (int cc = 0; cc < blk.w.cols(); ++cc) blk.w(r, cc) = s * rng.normal();
        blk.b = Mat::Zero(1, cout);
        blk.gamma = Mat::Constant(1, cout, 1.0);
        blk.beta = Mat::Zero(1, cout);
        br.blocks.push_back(std::move(blk));
    }
    int last = dims.back();
    br.out.w = Mat(last, out_channels);
    double s = 1.0 / std::sqrt(double(last));
    for (int r = 0; r < last; ++r)
        for (int cc = 0; cc < out_channels; ++cc) br.out.w(r, cc) = s * rng.normal();
    br.out.b = Mat::Zero(1, out_channels);
    return br;
}

Var branch_forward(Tape& t, HeadBranchParams& br, const Var& fmap, int h, int w) {
    Var x = fmap;
    for (auto& blk : br.blocks) {
        x = conv3x3(x, t.param(blk.w), t.param(blk.b), h, w);
        x = spatial_norm(x);
        int n = int(value(x).rows());
        x = add(mul(x, broadcast_rows(t.param(blk.gamma), n)), broadcast_rows(t.param(blk.beta), n));
        x = relu(x);
    }
    return affine(x, t.param(br.out.w), t.param(br.out.b));
}

// Corrected CenterNet radius: largest Gaussian radius keeping IoU >= overlap
// for a box of det_h x det_w cells.
double gaussian_radius(double det_h, double det_w, double min_overlap) {
    double a1 = 1, b1 = det_h + det_w, c1 = det_w * det_h * (1 - min_overlap) / (1 + min_overlap);
    double r1 = (b1 - std::sqrt(b1 * b1 - 4 * a1 * c1)) / (2 * a1);
    double a2 = 4, b2 = 2 * (det_h + det_w), c2 = (1 - min_overlap) * det_w * det_h;
    double r2 = (b2 - std::sqrt(b2 * b2 - 4 * a2 * c2)) / (2 * a2);
    double a3 = 4 * min_overlap, b3 = -2 * min_overlap * (det_h + det_w),
           c3 = (min_overlap - 1) * det_w * det_h;
    double r3 = (b3 + std::sqrt(b3 * b3 - 4 * a3 * c3)) / (2 * a3);
    return std::min({r1, r2, r3});
}

}  // namespace

HeadParams init_head(const ModelConfig& cfg, Rng& rng) {
    HeadParams p;
    p.score = init_branch(cfg, rng, 1);
    p.offset = init_branch(cfg, rng, 2);
    p.size = init_branch(cfg, rng, 2);
    return p;
}

HeadOutputVars head_forward_var(Tape& t, HeadParams& p, const Var& fmap, int h, int w,
                                int stride) {
    if (value(fmap).rows() != Eigen::Index(h) * w)
        throw Error(cat("head: feature map rows ", value(fmap).rows(), " vs grid ", h, "x", w));
    HeadOutputVars out;
    out.h = h;
    out.w = w;
    out.stride = stride;
    out.score = sigmoid(branch_forward(t, p.score, fmap, h, w));
    out.offset = add_scalar(sigmoid(branch_forward(t, p.offset, fmap, h, w)), -0.5);
    out.size = sigmoid(branch_forward(t, p.size, fmap, h, w));
    return out;
}

HeadOutputs head_forward(HeadParams& p, const FeatureMap& fmap) {
    Tape t;
    auto vars = head_forward_var(t, p, t.leaf(fmap.data), fmap.h, fmap.w, fmap.stride);
    return HeadOutputs{fmap.h, fmap.w, fmap.stride, value(vars.score), value(vars.offset),
                       value(vars.size)};
}

Box decode_state(const HeadOutputs& out, const CropMapping& crop) {
    if (out.score.rows() != Eigen::Index(out.h) * out.w || out.score.cols() != 1)
        throw Error("decode_state: bad score shape");
    if (crop.out_size != out.w * out.stride)
        throw Error(cat("decode_state: crop size ", crop.out_size, " vs grid ", out.w, "*",
                        out.stride));
    int best = 0;
    for (int i = 1; i < out.score.rows(); ++i)
        if (out.score(i, 0) > out.score(best, 0)) best = i;
    int ix = best % out.w, iy = best / out.w;
    double cx = (ix + 0.5 + out.offset(best, 0)) * out.stride;
    double cy = (iy + 0.5 + out.offset(best, 1)) * out.stride;
    double bw = out.size(best, 0) * crop.out_size;
    double bh = out.size(best, 1) * crop.out_size;
    Box crop_box{cx - bw / 2.0, cy - bh / 2.0, bw, bh};
    return crop.box_to_frame(crop_box);
}

TrainingTargets make_targets(const Box& gt_frame, const CropMapping& crop, int grid_h,
                             int grid_w) {
    if (!gt_frame.valid()) throw Error("make_targets: degenerate gt box");
    if (grid_h != grid_w) throw Error("make_targets: grid must be square");
    if (crop.out_size % grid_w != 0)
        throw Error(cat("make_targets: crop size ", crop.out_size, " not divisible by grid ",
                        grid_w));
    int stride = crop.out_size / grid_w;

    Box gt = crop.box_to_crop(gt_frame);
    if (gt.x2() <= 0 || gt.y2() <= 0 || gt.x >= crop.out_size || gt.y >= crop.out_size)
        throw Error("make_targets: gt box outside crop");
    double cx = gt.cx() / stride, cy = gt.cy() / stride;
    int ix = int(std::floor(cx)), iy = int(std::floor(cy));
    if (ix < 0 || iy < 0 || ix >= grid_w || iy >= grid_h)
        throw Error("make_targets: gt center outside grid");

    TrainingTargets t;
    t.h = grid_h;
    t.w = grid_w;
    t.stride = stride;
    t.gt_crop = gt;
    t.pos_cell = iy * grid_w + ix;
    t.offset = Mat::Zero(Eigen::Index(grid_h) * grid_w, 2);
    t.size = Mat::Zero(Eigen::Index(grid_h) * grid_w, 2);
    t.offset(t.pos_cell, 0) = cx - ix - 0.5;
    t.offset(t.pos_cell, 1) = cy - iy - 0.5;
    t.size(t.pos_cell, 0) = gt.w / crop.out_size;
    t.size(t.pos_cell, 1) = gt.h / crop.out_size;

    double r = std::floor(gaussian_radius(gt.h / stride, gt.w / stride, 0.7));
    double sigma = (2.0 * std::max(0.0, r) + 1.0) / 6.0;
    t.score = Mat::Zero(Eigen::Index(grid_h) * grid_w, 1);
    for (int y = 0; y < grid_h; ++y)
        for (int x = 0; x < grid_w; ++x) {
            double dx = x - ix, dy = y - iy;
            t.score(Eigen::Index(y) * grid_w + x, 0) =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
    t.score(t.pos_cell, 0) = 1.0;
    return t;
}

HeadOutputs targets_as_outputs(const TrainingTargets& t) {
    return HeadOutputs{t.h, t.w, t.stride, t.score, t.offset, t.size};
}

Var focal_loss_var(Tape& t, const Var& pred, const Mat& target) {
    const Mat& pv = value(pred);
    if (pv.rows() != target.rows() || pv.cols() != target.cols())
        throw Error(cat("focal_loss: shape mismatch (", pv.rows(), "x", pv.cols(), " vs ",
                        target.rows(), "x", target.cols(), ")"));
    if (pv.minCoeff() < 0.0 || pv.maxCoeff() > 1.0) throw Error("focal_loss: prediction outside [0,1]");
    if (target.minCoeff() < 0.0 || target.maxCoeff() > 1.0)
        throw Error("focal_loss: target outside [0,1]");

    int npos = 0;
    Mat pos_mask = Mat::Zero(target.rows(), target.cols());
    Mat neg_weight = Mat::Zero(target.rows(), target.cols());
    for (Eigen::Index i = 0; i < target.rows(); ++i)
        for (Eigen::Index j = 0; j < target.cols(); ++j) {
            if (target(i, j) == 1.0) {
                pos_mask(i, j) = 1.0;
                ++npos;
            } else {
                neg_weight(i, j) = std::pow(1.0 - target(i, j), 4.0);
            }
        }

    Var p = clamp(pred, 1e-7, 1.0 - 1e-7);
    Var one = t.leaf(Mat::Constant(target.rows(), target.cols(), 1.0));
    Var pos_term = mul(t.leaf(pos_mask), mul(square(sub(one, p)), log_(p)));
    Var neg_term = mul(t.leaf(neg_weight), mul(square(p), log_(sub(one, p))));
    return mul_scalar(sum(add(pos_term, neg_term)), -1.0 / std::max(1, npos));
}

double focal_loss(const Mat& pred, const Mat& target) {
    Tape t;
    return value(focal_loss_var(t, t.leaf(pred), target))(0, 0);
}

Var giou_var(Tape& t, const Var& x, const Var& y, const Var& w, const Var& h, const Box& fixed) {
    if (!fixed.valid()) throw Error("giou: degenerate box");
    auto c = [&](double v) { return t.scalar(v); };
    Var x2 = add(x, w), y2 = add(y, h);
    Var iw = sub(cwise_min(x2, c(fixed.x2())), cwise_max(x, c(fixed.x)));
    Var ih = sub(cwise_min(y2, c(fixed.y2())), cwise_max(y, c(fixed.y)));
    Var inter = mul(cwise_max(iw, c(0.0)), cwise_max(ih, c(0.0)));
    Var uni = sub(add(mul(w, h), c(fixed.area())), inter);
    Var hull_w = sub(cwise_max(x2, c(fixed.x2())), cwise_min(x, c(fixed.x)));
    Var hull_h = sub(cwise_max(y2, c(fixed.y2())), cwise_min(y, c(fixed.y)));
    Var hull = mul(hull_w, hull_h);
    return sub(div(inter, uni), div(sub(hull, uni), hull));
}

TotalLossVars total_loss_var(Tape& t, const HeadOutputVars& pred, const TrainingTargets& tg) {
    if (pred.h != tg.h || pred.w != tg.w)
        throw Error("total_loss: prediction and target grids differ");
    if (tg.pos_cell < 0) throw Error("total_loss: no positive cells in target");

    TotalLossVars out;
    out.cls = focal_loss_var(t, pred.score, tg.score);

    Var o_pred = block(pred.offset, tg.pos_cell, 0, 1, 2);
    Var s_pred = block(pred.size, tg.pos_cell, 0, 1, 2);
    Var o_tgt = t.leaf(tg.offset.row(tg.pos_cell));
    Var s_tgt = t.leaf(tg.size.row(tg.pos_cell));
    out.l1 = mul_scalar(add(sum(abs_(sub(o_pred, o_tgt))), sum(abs_(sub(s_pred, s_tgt)))), 0.25);

    // box decoded at the gt cell, in crop pixels
    int ix = tg.pos_cell % tg.w, iy = tg.pos_cell / tg.w;
    double out_size = double(tg.w) * tg.stride;
    Var cx = mul_scalar(add_scalar(block(o_pred, 0, 0, 1, 1), ix + 0.5), tg.stride);
    Var cy = mul_scalar(add_scalar(block(o_pred, 0, 1, 1, 1), iy + 0.5), tg.stride);
    Var bw = mul_scalar(block(s_pred, 0, 0, 1, 1), out_size);
    Var bh = mul_scalar(block(s_pred, 0, 1, 1, 1), out_size);
    Var bx = sub(cx, mul_scalar(bw, 0.5));
    Var by = sub(cy, mul_scalar(bh, 0.5));
    out.iou = sub(t.scalar(1.0), giou_var(t, bx, by, bw, bh, tg.gt_crop));

    out.total = add(out.cls, add(mul_scalar(out.iou, kLambdaIou), mul_scalar(out.l1, kLambdaL1)));
    return out;
}

LossBreakdown TotalLossVars::values() const {
    LossBreakdown b;
    b.cls = value(cls)(0, 0);
    b.iou = value(iou)(0, 0);
    b.l1 = value(l1)(0, 0);
    b.total = value(total)(0, 0);
    return b;
}

LossBreakdown total_loss(const HeadOutputs& pred, const TrainingTargets& targets) {
    Tape t;
    HeadOutputVars vars{pred.h, pred.w, pred.stride, t.leaf(pred.score), t.leaf(pred.offset),
                        t.leaf(pred.size)};
    return total_loss_var(t, vars, targets).values();
}

}  // namespace vltrack
