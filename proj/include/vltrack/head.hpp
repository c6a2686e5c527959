#pragma once

#include <vector>

#include "vltrack/crop.hpp"
#include "vltrack/encoders.hpp"

namespace vltrack {

// conv3x3 -> per-channel spatial normalization with learned scale/shift -> relu
struct ConvBlockParams {
    Mat w;      // (9*cin) x cout
    Mat b;      // 1 x cout
    Mat gamma;  // 1 x cout
    Mat beta;   // 1 x cout
};

struct HeadBranchParams {
    std::vector<ConvBlockParams> blocks;
    AffineParams out;  // 1x1 conv to the branch's output channels
};

// Three branches over the correlated map: classification score, center
// offsets (fractions of a cell, measured from the cell center), and box size
// (normalized by the crop side).
struct HeadParams {
    HeadBranchParams score, offset, size;
    void visit(const std::string& prefix, const ParamVisitor& v);
};

HeadParams init_head(const ModelConfig& cfg, Rng& rng);

struct HeadOutputs {
    int h = 0, w = 0, stride = 0;
    Mat score;   // (HW) x 1 in [0,1]
    Mat offset;  // (HW) x 2 in (-0.5, 0.5)
    Mat size;    // (HW) x 2 in (0,1)
};

struct HeadOutputVars {
    int h = 0, w = 0, stride = 0;
    Var score, offset, size;
};

HeadOutputVars head_forward_var(Tape& t, HeadParams& p, const Var& fmap, int h, int w, int stride);
HeadOutputs head_forward(HeadParams& p, const FeatureMap& fmap);

// Eq-style decode: argmax score cell (ties -> lowest row-major index), center
// (cell + 0.5 + offset) * stride in crop pixels, size * crop side, mapped back
// to frame pixels.
Box decode_state(const HeadOutputs& out, const CropMapping& crop);

// Training targets for one ground-truth box.
struct TrainingTargets {
    int h = 0, w = 0, stride = 0;
    Mat score;   // Gaussian bump peaked at the gt cell
    Mat offset;  // nonzero only at the gt cell
    Mat size;
    int pos_cell = -1;
    Box gt_crop;  // gt in crop pixels
};

TrainingTargets make_targets(const Box& gt_frame, const CropMapping& crop, int grid_h, int grid_w);

// Targets as decodable head outputs (exact inverse of decode_state).
HeadOutputs targets_as_outputs(const TrainingTargets& t);

struct LossBreakdown {
    double cls = 0, iou = 0, l1 = 0;
    double total = 0;  // cls + 2*iou + 5*l1
};

inline constexpr double kLambdaIou = 2.0;
inline constexpr double kLambdaL1 = 5.0;

// Penalty-reduced focal loss (alpha=2, beta=4), normalized by positive count.
Var focal_loss_var(Tape& t, const Var& pred, const Mat& target);
double focal_loss(const Mat& pred, const Mat& target);

// GIoU of a variable box (x,y,w,h as 1x1 vars) against a fixed box.
Var giou_var(Tape& t, const Var& x, const Var& y, const Var& w, const Var& h, const Box& fixed);

struct TotalLossVars {
    Var cls, iou, l1, total;
    LossBreakdown values() const;
};

TotalLossVars total_loss_var(Tape& t, const HeadOutputVars& pred, const TrainingTargets& targets);
LossBreakdown total_loss(const HeadOutputs& pred, const TrainingTargets& targets);

}  // namespace vltrack
