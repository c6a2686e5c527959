#pragma once

#include "vltrack/crop.hpp"
#include "vltrack/dyndesc.hpp"
#include "vltrack/model.hpp"
#include "vltrack/sequence.hpp"

namespace vltrack {

struct TrackOptions {
    double search_area_factor = 4.0;
    double template_area_factor = 2.0;
    bool use_text = true;    // false: vision-only pathway (backbone + head)
    bool use_window = true;  // cosine motion prior on the score map
    double window_weight = 0.49;
};

// Per-frame diagnostics for description-consistency analysis.
struct TrackDiagnostics {
    std::array<int, 4> labels{-1, -1, -1, -1};  // per-kind argmax, -1 when text is off
    AttributeWeights weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
    double peak_score = 0;
    Box raw_box;  // before clamping to the frame
};

struct TrackerState {
    TargetDescription reference;  // frozen at init, never mutated afterwards
    TargetDescription current;    // from the patch at the previous predicted location
    Image template_patch;
    Box previous;
    int frame_index = 0;
};

class Tracker {
public:
    Tracker(TrackModel& model, const EmbeddedVocabulary& ev, TrackOptions opts = {});

    TrackerState init(const Image& frame, const Box& box) const;
    std::pair<Box, TrackDiagnostics> track(TrackerState& state, const Image& frame) const;

    const TrackOptions& options() const { return opts_; }
    TrackModel& model() const { return model_; }
    const EmbeddedVocabulary& vocabulary() const { return ev_; }

private:
    TrackModel& model_;
    const EmbeddedVocabulary& ev_;
    TrackOptions opts_;
};

// ---- toy training ----

struct TrainConfig {
    int iterations = 400;
    int batch = 4;
    double lr = 1e-3;
    uint64_t seed = 0;
    double jitter_center = 0.2;  // search-center jitter, fraction of box size
    double jitter_scale = 0.25;  // log2 range of crop-size jitter
    bool use_text = true;
};

struct TrainReport {
    std::vector<LossBreakdown> curve;  // one entry per iteration (batch mean)
};

// Minimizes the tracking objective over all trainable parameters on synthetic
// sequences. Deterministic for a fixed seed. Throws on divergence.
TrainReport train_toy(TrackModel& model, const std::vector<Sequence>& dataset,
                      const EmbeddedVocabulary& ev, const TrainConfig& cfg);

void write_loss_curve(const std::string& path, const TrainReport& report);

}  // namespace vltrack
