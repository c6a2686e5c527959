#include "vltrack/tracker.hpp"

#include <cmath>
#include <fstream>

#include "vltrack/optim.hpp"

namespace vltrack {

using namespace ad;

Tracker::Tracker(TrackModel& model, const EmbeddedVocabulary& ev, TrackOptions opts)
    : model_(model), ev_(ev), opts_(opts) {
    model_.cfg.validate();
    for (VocabKind k : kAllKinds)
        if (ev_.embeddings[size_t(k)].size() != ev_.vocab.labels(k).size())
            throw Error("tracker: vocabulary and embeddings disagree");
}

TrackerState Tracker::init(const Image& frame, const Box& box) const {
    if (!box.valid()) throw Error("tracker init: degenerate box");
    auto [patch, mapping] =
        crop_patch(frame, box, opts_.template_area_factor, model_.cfg.template_size);
    TrackerState st;
    st.template_patch = std::move(patch);
    if (opts_.use_text) {
        st.reference = model_.describe(st.template_patch, ev_);
        st.current = st.reference;
    }
    st.previous = box;
    st.frame_index = 0;
    return st;
}

namespace {

// Multiplicative cosine-window reweighting of the score map.
Mat apply_window(const Mat& score, int h, int w, double weight) {
    auto hann = [](int i, int n) {
        return n > 1 ? 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n - 1))) : 1.0;
    };
    Mat out = score;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out(Eigen::Index(y) * w + x, 0) *= (1.0 - weight) + weight * hann(y, h) * hann(x, w);
    return out;
}

struct TextFeatures {
    Eigen::RowVectorXd category, color, material, texture;
};

// The description of the patch at the previous predicted location supplies
// the current attribute distributions; the drift between those and the frozen
// reference sets the weights that reweight the reference attribute features.
TextFeatures dynamic_text_features(const TargetDescription& reference,
                                   const TargetDescription& current,
                                   AttributeWeights* weights_out) {
    AttributeDifference d;
    d.color = attribute_difference(reference.kind(VocabKind::color).probs,
                                   current.kind(VocabKind::color).probs);
    d.material = attribute_difference(reference.kind(VocabKind::material).probs,
                                      current.kind(VocabKind::material).probs);
    d.texture = attribute_difference(reference.kind(VocabKind::texture).probs,
                                     current.kind(VocabKind::texture).probs);
    AttributeWeights w = attribute_weights(d);
    if (weights_out) *weights_out = w;

    auto [t_co, t_m, t_t] = dynamic_attribute_features(
        w, reference.kind(VocabKind::color).feature, reference.kind(VocabKind::material).feature,
        reference.kind(VocabKind::texture).feature);
    return {reference.kind(VocabKind::classes).feature, t_co, t_m, t_t};
}

}  // namespace

std::pair<Box, TrackDiagnostics> Tracker::track(TrackerState& state, const Image& frame) const {
    const ModelConfig& cfg = model_.cfg;
    auto [search, search_map] =
        crop_patch(frame, state.previous, opts_.search_area_factor, cfg.search_size);

    TrackDiagnostics diag;
    FeatureMap v = backbone_forward(model_.backbone, state.template_patch, search, cfg);
    FeatureMap correlated = v;
    if (opts_.use_text) {
        auto [patch, patch_map] =
            crop_patch(frame, state.previous, opts_.template_area_factor, cfg.template_size);
        TargetDescription current = model_.describe(patch, ev_);
        TextFeatures feats = dynamic_text_features(state.reference, current, &diag.weights);
        correlated = correlate(v, feats.category, feats.color, feats.material, feats.texture,
                               model_.proj);
        for (VocabKind k : kAllKinds) diag.labels[size_t(k)] = current.kind(k).argmax;
        state.current = std::move(current);
    }

    HeadOutputs out = head_forward(model_.head, correlated);
    if (opts_.use_window)
        out.score = apply_window(out.score, out.h, out.w, opts_.window_weight);
    diag.peak_score = out.score.maxCoeff();

    Box raw = decode_state(out, search_map);
    diag.raw_box = raw;
    Box result = clamp_box_to_frame(raw, frame.width, frame.height);
    state.previous = result;
    state.frame_index += 1;
    return {result, diag};
}

// ---- training ----

namespace {

struct TrainSample {
    Image template_patch;
    Image current_patch;
    Image search;
    TrainingTargets targets;
};

TrainSample make_sample(const Sequence& seq, size_t t, const ModelConfig& cfg,
                        const TrainConfig& tc, const TrackOptions& opts, Rng& rng) {
    const Box& gt_prev = *seq.gt[t - 1];
    const Box& gt_cur = *seq.gt[t];

    Image frame_first = seq.frame(0);
    Image frame_cur = seq.frame(t);

    TrainSample s;
    s.template_patch =
        crop_patch(frame_first, *seq.gt[0], opts.template_area_factor, cfg.template_size).first;
    s.current_patch =
        crop_patch(frame_cur, gt_prev, opts.template_area_factor, cfg.template_size).first;

    // jittered search center/scale around the current ground truth
    Box jittered = gt_cur;
    jittered.x += rng.uniform(-tc.jitter_center, tc.jitter_center) * gt_cur.w;
    jittered.y += rng.uniform(-tc.jitter_center, tc.jitter_center) * gt_cur.h;
    double scale = std::exp2(rng.uniform(-tc.jitter_scale, tc.jitter_scale));
    jittered.w *= scale;
    jittered.h *= scale;

    auto [search, mapping] = crop_patch(frame_cur, jittered, opts.search_area_factor,
                                        cfg.search_size);
    s.search = std::move(search);
    s.targets = make_targets(gt_cur, mapping, cfg.search_grid(), cfg.search_grid());
    return s;
}

Var sample_loss(Tape& tape, TrackModel& model, const EmbeddedVocabulary& ev,
                const TrainSample& s, bool use_text, LossBreakdown* breakdown) {
    const ModelConfig& cfg = model.cfg;
    Var v = backbone_forward_var(tape, model.backbone, s.template_patch, s.search, cfg);
    Var correlated = v;
    if (use_text) {
        DescriptionVars ref = describe_var(tape, model.img_enc, model.txt_enc, model.prompt,
                                           s.template_patch, ev, cfg);
        DescriptionVars cur = describe_var(tape, model.img_enc, model.txt_enc, model.prompt,
                                           s.current_patch, ev, cfg);
        Var d_color = attribute_difference_var(ref.kind(VocabKind::color).probs,
                                               cur.kind(VocabKind::color).probs);
        Var d_material = attribute_difference_var(ref.kind(VocabKind::material).probs,
                                                  cur.kind(VocabKind::material).probs);
        Var d_texture = attribute_difference_var(ref.kind(VocabKind::texture).probs,
                                                 cur.kind(VocabKind::texture).probs);
        Var w = attribute_weights_var(tape, d_color, d_material, d_texture);
        Var t_co = scale_feature_var(block(w, 0, 0, 1, 1), ref.kind(VocabKind::color).feature);
        Var t_m = scale_feature_var(block(w, 0, 1, 1, 1), ref.kind(VocabKind::material).feature);
        Var t_t = scale_feature_var(block(w, 0, 2, 1, 1), ref.kind(VocabKind::texture).feature);
        correlated = correlate_var(tape, v, ref.kind(VocabKind::classes).feature, t_co, t_m, t_t,
                                   model.proj);
    }
    auto out = head_forward_var(tape, model.head, correlated, cfg.search_grid(),
                                cfg.search_grid(), cfg.stride);
    TotalLossVars loss = total_loss_var(tape, out, s.targets);
    if (breakdown) *breakdown = loss.values();
    return loss.total;
}

}  // namespace

TrainReport train_toy(TrackModel& model, const std::vector<Sequence>& dataset,
                      const EmbeddedVocabulary& ev, const TrainConfig& cfg) {
    if (dataset.empty()) throw Error("train_toy: empty dataset");
    for (const auto& seq : dataset) {
        seq.validate();
        if (seq.size() < 2) throw Error(cat("train_toy: sequence ", seq.name, " too short"));
        for (const auto& b : seq.gt)
            if (!b.has_value()) throw Error("train_toy: training sequences must have full gt");
    }
    if (cfg.iterations < 1 || cfg.batch < 1) throw Error("train_toy: bad iteration/batch count");

    TrackOptions opts;  // crop geometry shared with tracking
    Rng rng(cfg.seed);
    AdamOptimizer optimizer(model.parameters(), cfg.lr);
    TrainReport report;
    report.curve.reserve(size_t(cfg.iterations));

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        Tape tape;
        std::vector<Var> losses;
        LossBreakdown mean{};
        for (int b = 0; b < cfg.batch; ++b) {
            size_t si = size_t(rng.uniform_int(0, int64_t(dataset.size()) - 1));
            size_t t = size_t(rng.uniform_int(1, int64_t(dataset[si].size()) - 1));
            TrainSample sample = make_sample(dataset[si], t, model.cfg, cfg, opts, rng);
            LossBreakdown bd;
            losses.push_back(sample_loss(tape, model, ev, sample, cfg.use_text, &bd));
            mean.cls += bd.cls / cfg.batch;
            mean.iou += bd.iou / cfg.batch;
            mean.l1 += bd.l1 / cfg.batch;
            mean.total += bd.total / cfg.batch;
        }
        Var total = losses.size() == 1 ? losses[0] : sum(concat_rows(losses));
        total = mul_scalar(total, 1.0 / cfg.batch);
        if (!std::isfinite(mean.total))
            throw Error(cat("train_toy: non-finite loss at iteration ", iter));
        tape.backward(total);
        optimizer.step(tape);
        model.clamp_constraints();
        report.curve.push_back(mean);
    }
    return report;
}

void write_loss_curve(const std::string& path, const TrainReport& report) {
    std::ofstream f(path);
    if (!f) throw Error(cat("cannot open ", path, " for writing"));
    f << "iteration,cls,iou,l1,total\n";
    for (size_t i = 0; i < report.curve.size(); ++i) {
        const auto& b = report.curve[i];
        f << i << "," << b.cls << "," << b.iou << "," << b.l1 << "," << b.total << "\n";
    }
    if (!f) throw Error(cat("failed writing ", path));
}

}  // namespace vltrack
