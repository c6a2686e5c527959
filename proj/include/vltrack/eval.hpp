#pragma once

#include <array>

#include "vltrack/tracker.hpp"

namespace vltrack {

// ---- frame-level metrics ----
// Conventions (fixed so numbers are reproducible): success and SR use strict
// `iou > t`; precision uses `error <= t`. Success averages 21 thresholds
// {0, 0.05, ..., 1}; normalized precision averages 101 thresholds
// {0, 0.005, ..., 0.5}.

double success_auc(const std::vector<double>& ious);
double precision(const std::vector<double>& center_errors, double threshold_px = 20.0);
double normalized_precision(const std::vector<double>& normalized_errors);

struct AoSr {
    double ao = 0, sr50 = 0, sr75 = 0;
};
AoSr ao_sr(const std::vector<double>& ious);

// ---- reports ----

struct SequenceMetrics {
    std::string name;
    int frames = 0;
    double auc = 0, p = 0, pnorm = 0, ao = 0, sr50 = 0, sr75 = 0;
};

struct MetricReport {
    std::string protocol = "plain";  // plain / tre / sre-shift / sre-scale
    std::vector<SequenceMetrics> rows;
    SequenceMetrics aggregate;       // pairwise-summed mean over rows
    double tre_worst_auc = -1;       // TRE only; worst segment AUC

    void validate() const;  // all values in [0,1]
};

// Frames with absent gt are excluded. pred[i] corresponds to gt[i].
SequenceMetrics sequence_metrics(const std::string& name, const std::vector<Box>& pred,
                                 const std::vector<std::optional<Box>>& gt);
MetricReport make_report(std::vector<SequenceMetrics> rows, const std::string& protocol);

void write_report(const std::string& path, const MetricReport& report);

// ---- tracker runs and robustness protocols ----

struct TrackRun {
    std::vector<Box> boxes;                    // boxes[0] is the init box
    std::vector<std::array<int, 4>> labels;    // per-frame description argmaxes
};

TrackRun run_tracker(const Tracker& tracker, const Sequence& seq, size_t start_frame = 0,
                     const std::optional<Box>& init_box = {});

MetricReport evaluate_plain(const Tracker& tracker, const std::vector<Sequence>& seqs);

// Temporal robustness: `segments` runs started at evenly spaced frames, each
// initialized at that frame's gt. One segment reduces to plain evaluation.
MetricReport run_tre(const Tracker& tracker, const Sequence& seq, int segments = 20);

enum class SreMode { shift, scale };
// Spatial robustness: perturbed first-frame initializations. shift: 8
// directions scaled by `magnitude` of the box size; scale: one run per factor.
MetricReport run_sre(const Tracker& tracker, const Sequence& seq, SreMode mode,
                     double magnitude = 0.1,
                     const std::vector<double>& scales = {0.8, 0.9, 1.1, 1.2});

// Fraction of frames whose label equals the majority label (ties -> lowest
// index), one value per vocabulary kind.
std::array<double, 4> description_consistency(const std::vector<std::array<int, 4>>& labels);

}  // namespace vltrack
