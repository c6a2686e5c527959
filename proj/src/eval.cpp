#include "vltrack/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace vltrack {

namespace {

// Exact for 2^k identical addends, so identity-perturbation protocols reduce
// to plain evaluation bit-exactly.
double pairwise_sum(const double* data, size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return data[0];
    size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / double(v.size());
}

}  // namespace

double success_auc(const std::vector<double>& ious) {
    if (ious.empty()) return 0.0;
    double acc = 0;
    for (int k = 0; k <= 20; ++k) {
        double t = k * 0.05;
        size_t cnt = 0;
        for (double v : ious)
            if (v > t) ++cnt;
        acc += double(cnt) / double(ious.size());
    }
    return acc / 21.0;
}

double precision(const std::vector<double>& center_errors, double threshold_px) {
    if (center_errors.empty()) return 0.0;
    size_t cnt = 0;
    for (double e : center_errors)
        if (e <= threshold_px) ++cnt;
    return double(cnt) / double(center_errors.size());
}

double normalized_precision(const std::vector<double>& normalized_errors) {
    if (normalized_errors.empty()) return 0.0;
    double acc = 0;
    for (int k = 0; k <= 100; ++k) {
        double t = 0.005 * k;
        size_t cnt = 0;
        for (double e : normalized_errors)
            if (e <= t) ++cnt;
        acc += double(cnt) / double(normalized_errors.size());
    }
    return acc / 101.0;
}

AoSr ao_sr(const std::vector<double>& ious) {
    if (ious.empty()) return {};
    AoSr out;
    double s = 0;
    size_t c50 = 0, c75 = 0;
    for (double v : ious) {
        s += v;
        if (v > 0.5) ++c50;
        if (v > 0.75) ++c75;
    }
    out.ao = s / double(ious.size());
    out.sr50 = double(c50) / double(ious.size());
    out.sr75 = double(c75) / double(ious.size());
    return out;
}

SequenceMetrics sequence_metrics(const std::string& name, const std::vector<Box>& pred,
                                 const std::vector<std::optional<Box>>& gt) {
    if (pred.size() != gt.size())
        throw Error(cat("sequence_metrics: ", pred.size(), " predictions vs ", gt.size(),
                        " annotations for ", name));
    std::vector<double> ious, errs, nerrs;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!gt[i].has_value()) continue;
        ious.push_back(iou(pred[i], *gt[i]));
        errs.push_back(center_error(pred[i], *gt[i]));
        nerrs.push_back(normalized_center_error(pred[i], *gt[i]));
    }
    SequenceMetrics m;
    m.name = name;
    m.frames = int(ious.size());
    m.auc = success_auc(ious);
    m.p = precision(errs);
    m.pnorm = normalized_precision(nerrs);
    AoSr a = ao_sr(ious);
    m.ao = a.ao;
    m.sr50 = a.sr50;
    m.sr75 = a.sr75;
    return m;
}

void MetricReport::validate() const {
    auto check_row = [](const SequenceMetrics& m) {
        for (double v : {m.auc, m.p, m.pnorm, m.ao, m.sr50, m.sr75})
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(cat("metric out of [0,1] for ", m.name, ": ", v));
    };
    for (const auto& r : rows) check_row(r);
    check_row(aggregate);
}

MetricReport make_report(std::vector<SequenceMetrics> rows, const std::string& protocol) {
    if (rows.empty()) throw Error("make_report: no rows");
    MetricReport r;
    r.protocol = protocol;
    r.rows = std::move(rows);

    auto collect = [&](auto field) {
        std::vector<double> v;
        v.reserve(r.rows.size());
        for (const auto& row : r.rows) v.push_back(row.*field);
        return pairwise_mean(v);
    };
    r.aggregate.name = "aggregate";
    int total_frames = 0;
    for (const auto& row : r.rows) total_frames += row.frames;
    r.aggregate.frames = total_frames;
    r.aggregate.auc = collect(&SequenceMetrics::auc);
    r.aggregate.p = collect(&SequenceMetrics::p);
    r.aggregate.pnorm = collect(&SequenceMetrics::pnorm);
    r.aggregate.ao = collect(&SequenceMetrics::ao);
    r.aggregate.sr50 = collect(&SequenceMetrics::sr50);
    r.aggregate.sr75 = collect(&SequenceMetrics::sr75);
    r.validate();
    return r;
}

void write_report(const std::string& path, const MetricReport& report) {
    std::ofstream f(path);
    if (!f) throw Error(cat("cannot open ", path, " for writing"));
    f << "protocol," << report.protocol << "\n";
    f << "name,frames,auc,p,pnorm,ao,sr50,sr75\n";
    f.precision(6);
    f << std::fixed;
    auto row = [&](const SequenceMetrics& m) {
        f << m.name << "," << m.frames << "," << m.auc << "," << m.p << "," << m.pnorm << ","
          << m.ao << "," << m.sr50 << "," << m.sr75 << "\n";
    };
    for (const auto& r : report.rows) row(r);
    row(report.aggregate);
    if (report.tre_worst_auc >= 0) f << "tre_worst_auc," << report.tre_worst_auc << "\n";
    if (!f) throw Error(cat("failed writing ", path));
}

TrackRun run_tracker(const Tracker& tracker, const Sequence& seq, size_t start_frame,
                     const std::optional<Box>& init_box) {
    seq.validate();
    if (start_frame >= seq.size())
        throw Error(cat("run_tracker: start frame ", start_frame, " out of range"));
    Box init = init_box.has_value() ? *init_box
                                    : (seq.gt[start_frame].has_value()
                                           ? *seq.gt[start_frame]
                                           : throw Error("run_tracker: no gt at start frame"));
    TrackRun run;
    TrackerState state = tracker.init(seq.frame(start_frame), init);
    run.boxes.push_back(init);
    run.labels.push_back({state.reference.kind(VocabKind::classes).argmax,
                          state.reference.kind(VocabKind::color).argmax,
                          state.reference.kind(VocabKind::material).argmax,
                          state.reference.kind(VocabKind::texture).argmax});
    for (size_t i = start_frame + 1; i < seq.size(); ++i) {
        auto [box, diag] = tracker.track(state, seq.frame(i));
        run.boxes.push_back(box);
        run.labels.push_back(diag.labels);
    }
    return run;
}

MetricReport evaluate_plain(const Tracker& tracker, const std::vector<Sequence>& seqs) {
    std::vector<SequenceMetrics> rows;
    for (const auto& seq : seqs) {
        TrackRun run = run_tracker(tracker, seq);
        rows.push_back(sequence_metrics(seq.name, run.boxes, seq.gt));
    }
    return make_report(std::move(rows), "plain");
}

MetricReport run_tre(const Tracker& tracker, const Sequence& seq, int segments) {
    seq.validate();
    if (segments < 1) throw Error("run_tre: segments must be >= 1");
    size_t n = seq.size();
    std::vector<SequenceMetrics> rows;
    std::vector<double> aucs;
    for (int s = 0; s < segments; ++s) {
        size_t start = size_t(double(s) * double(n) / double(segments));
        if (start > n - 2) start = n - 2;
        // advance to the next annotated frame
        while (start < n - 1 && !seq.gt[start].has_value()) ++start;
        if (!seq.gt[start].has_value()) continue;

        TrackRun run = run_tracker(tracker, seq, start);
        std::vector<std::optional<Box>> gt_tail(seq.gt.begin() + long(start), seq.gt.end());
        SequenceMetrics m = sequence_metrics(cat(seq.name, "@", start), run.boxes, gt_tail);
        aucs.push_back(m.auc);
        rows.push_back(std::move(m));
    }
    MetricReport report = make_report(std::move(rows), "tre");
    report.tre_worst_auc = *std::min_element(aucs.begin(), aucs.end());
    return report;
}

MetricReport run_sre(const Tracker& tracker, const Sequence& seq, SreMode mode, double magnitude,
                     const std::vector<double>& scales) {
    seq.validate();
    const Box& gt0 = *seq.gt[0];
    Image first = seq.frame(0);
    std::vector<std::pair<std::string, Box>> inits;

    if (mode == SreMode::shift) {
        const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
        for (int i = 0; i < 8; ++i) {
            Box b = gt0;
            b.x += dirs[i][0] * magnitude * gt0.w;
            b.y += dirs[i][1] * magnitude * gt0.h;
            inits.emplace_back(cat(seq.name, "_shift", i), clamp_box_to_frame(b, first.width, first.height));
        }
    } else {
        if (scales.empty()) throw Error("run_sre: no scale factors");
        for (size_t i = 0; i < scales.size(); ++i) {
            double s = scales[i];
            if (s <= 0) throw Error("run_sre: scale factors must be positive");
            Box b{gt0.cx() - gt0.w * s / 2, gt0.cy() - gt0.h * s / 2, gt0.w * s, gt0.h * s};
            inits.emplace_back(cat(seq.name, "_scale", s), clamp_box_to_frame(b, first.width, first.height));
        }
    }

    std::vector<SequenceMetrics> rows;
    for (const auto& [name, init] : inits) {
        TrackRun run = run_tracker(tracker, seq, 0, init);
        rows.push_back(sequence_metrics(name, run.boxes, seq.gt));
    }
    return make_report(std::move(rows), mode == SreMode::shift ? "sre-shift" : "sre-scale");
}

std::array<double, 4> description_consistency(const std::vector<std::array<int, 4>>& labels) {
    std::array<double, 4> out{0, 0, 0, 0};
    if (labels.empty()) return out;
    for (size_t k = 0; k < 4; ++k) {
        std::map<int, int> counts;
        for (const auto& l : labels) counts[l[k]]++;
        int best_label = counts.begin()->first, best_count = counts.begin()->second;
        for (const auto& [label, count] : counts)
            if (count > best_count) {  // ties keep the lowest label (map order)
                best_label = label;
                best_count = count;
            }
        int match = 0;
        for (const auto& l : labels)
            if (l[k] == best_label) ++match;
        out[k] = double(match) / double(labels.size());
    }
    return out;
}

}  // namespace vltrack
