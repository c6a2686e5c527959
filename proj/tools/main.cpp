#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "vltrack/eval.hpp"
#include "vltrack/plot.hpp"
#include "vltrack/synth.hpp"

using namespace vltrack;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct RunConfig {
    uint64_t seed = 0;
    std::string weights;
    std::string vocab = "data/vocab.json";
    std::string dataset;
    std::string format = "synth";
    std::string out = "out";
    bool window = true;
    bool text = true;
    ModelConfig model = toy_config();
    TrainConfig train;
};

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(cat("config: cannot open ", path));
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(cat("config ", path, ": parse error: ", e.what()));
    }
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("seed", c.seed);
    get("weights", c.weights);
    get("vocab", c.vocab);
    get("dataset", c.dataset);
    get("format", c.format);
    get("out", c.out);
    get("window", c.window);
    get("text", c.text);
    if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model").dump());
    if (j.contains("train")) {
        const auto& t = j.at("train");
        auto gt = [&](const char* key, auto& field) {
            if (t.contains(key)) field = t.at(key).get<std::decay_t<decltype(field)>>();
        };
        gt("iterations", c.train.iterations);
        gt("batch", c.train.batch);
        gt("lr", c.train.lr);
        gt("jitter_center", c.train.jitter_center);
        gt("jitter_scale", c.train.jitter_scale);
    }
    return c;
}

Box parse_box_arg(const std::string& s) {
    std::string cleaned = s;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    Box b;
    if (!(ss >> b.x >> b.y >> b.w >> b.h) || !b.valid())
        throw ConfigError(cat("bad box '", s, "' (want x,y,w,h with positive size)"));
    return b;
}

std::vector<Sequence> load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("no dataset given (--dataset)");
    if (cfg.format == "synth") {
        if (!fs::is_regular_file(cfg.dataset))
            throw ConfigError(cat("no such synth spec file: ", cfg.dataset));
        return generate_synthetic_suite(load_synth_suite_spec(cfg.dataset));
    }
    DatasetFormat fmt = parse_format(cfg.format);
    if (!fs::is_directory(cfg.dataset))
        throw ConfigError(cat("no such dataset directory: ", cfg.dataset));
    // either one sequence directory or a directory of sequence directories
    for (const char* anno : {"groundtruth_rect.txt", "groundtruth.txt"})
        if (fs::is_regular_file(fs::path(cfg.dataset) / anno))
            return {parse_sequence(cfg.dataset, fmt)};
    std::vector<std::string> dirs;
    for (const auto& e : fs::directory_iterator(cfg.dataset))
        if (e.is_directory()) dirs.push_back(e.path().string());
    std::sort(dirs.begin(), dirs.end());
    std::vector<Sequence> seqs;
    for (const auto& d : dirs) seqs.push_back(parse_sequence(d, fmt));
    if (seqs.empty()) throw ConfigError(cat("no sequences under ", cfg.dataset));
    return seqs;
}

TrackModel load_model_checked(const RunConfig& cfg) {
    if (cfg.weights.empty()) throw ConfigError("no weights given (--weights)");
    if (!fs::is_regular_file(cfg.weights))
        throw ConfigError(cat("weights file not found: ", cfg.weights));
    return load_weights(cfg.weights);
}

EmbeddedVocabulary load_vocab_checked(const RunConfig& cfg, const TrackModel& model) {
    if (!fs::is_regular_file(cfg.vocab))
        throw ConfigError(cat("vocabulary not found: ", cfg.vocab));
    return embed_vocabulary(load_vocabulary(cfg.vocab), model.embedder());
}

TrackOptions track_options(const RunConfig& cfg) {
    TrackOptions o;
    o.use_window = cfg.window;
    o.use_text = cfg.text;
    return o;
}

void write_description_log(const std::string& path, const EmbeddedVocabulary& ev,
                           const TrackRun& run) {
    std::ofstream f(path);
    if (!f) throw Error(cat("cannot open ", path, " for writing"));
    f << "frame,classes,color,material,texture\n";
    for (size_t i = 0; i < run.labels.size(); ++i) {
        f << i;
        for (VocabKind k : kAllKinds) {
            int idx = run.labels[i][size_t(k)];
            f << "," << (idx < 0 ? "-" : ev.vocab.labels(k)[size_t(idx)]);
        }
        f << "\n";
    }
}

int cmd_track(const RunConfig& cfg) {
    TrackModel model = load_model_checked(cfg);
    EmbeddedVocabulary ev = load_vocab_checked(cfg, model);
    auto seqs = load_dataset(cfg);
    fs::create_directories(cfg.out);

    Tracker tracker(model, ev, track_options(cfg));
    for (const auto& seq : seqs) {
        TrackRun run = run_tracker(tracker, seq);
        write_result_file(cat(cfg.out, "/", seq.name, ".txt"), run.boxes);
        write_description_log(cat(cfg.out, "/", seq.name, "_desc.txt"), ev, run);
        std::cout << seq.name << ": " << run.boxes.size() << " frames\n";
    }
    return 0;
}

int cmd_train_toy(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("train-toy needs a synth dataset spec (--dataset)");
    if (cfg.format != "synth") throw ConfigError("train-toy only trains on synth datasets");
    if (!fs::is_regular_file(cfg.vocab))
        throw ConfigError(cat("vocabulary not found: ", cfg.vocab));
    if (!fs::is_regular_file(cfg.dataset))
        throw ConfigError(cat("no such synth spec file: ", cfg.dataset));

    TrackModel model = TrackModel::init(cfg.model, cfg.seed);
    EmbeddedVocabulary ev = embed_vocabulary(load_vocabulary(cfg.vocab), model.embedder());
    auto dataset = generate_synthetic_suite(load_synth_suite_spec(cfg.dataset));

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.use_text = cfg.text;
    TrainReport report = train_toy(model, dataset, ev, tc);

    fs::create_directories(cfg.out);
    std::string wpath = cat(cfg.out, "/weights.bin");
    save_weights(wpath, model);
    write_loss_curve(cat(cfg.out, "/loss_curve.csv"), report);
    std::cout << "trained " << tc.iterations << " iterations: loss " << report.curve.front().total
              << " -> " << report.curve.back().total << "\n"
              << "weights: " << wpath << "\n";
    return 0;
}

int cmd_describe(const RunConfig& cfg, const std::string& image_path, const std::string& box_arg) {
    if (!fs::is_regular_file(image_path)) throw ConfigError(cat("image not found: ", image_path));
    Box box = parse_box_arg(box_arg);
    TrackModel model = load_model_checked(cfg);
    EmbeddedVocabulary ev = load_vocab_checked(cfg, model);

    Image frame = read_ppm(image_path);
    auto [patch, mapping] = crop_patch(frame, box, 2.0, model.cfg.template_size);
    TargetDescription d = model.describe(patch, ev);
    for (VocabKind k : kAllKinds) {
        const auto& kd = d.kind(k);
        std::cout << kind_name(k) << ": " << ev.vocab.labels(k)[size_t(kd.argmax)]
                  << " (p=" << kd.probs(kd.argmax) << ")\n";
    }
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& results_dir, const std::string& protocol) {
    auto seqs = load_dataset(cfg);
    fs::create_directories(cfg.out);

    MetricReport report;
    std::vector<Curve> success_curves, precision_curves;
    auto add_curves = [&](const std::string& name, const std::vector<Box>& pred,
                          const std::vector<std::optional<Box>>& gt) {
        std::vector<double> ious, errs;
        for (size_t i = 0; i < pred.size() && i < gt.size(); ++i) {
            if (!gt[i].has_value()) continue;
            ious.push_back(iou(pred[i], *gt[i]));
            errs.push_back(center_error(pred[i], *gt[i]));
        }
        success_curves.push_back(success_curve(name, ious));
        precision_curves.push_back(precision_curve(name, errs));
    };

    if (!results_dir.empty()) {
        std::vector<SequenceMetrics> rows;
        for (const auto& seq : seqs) {
            std::string path = cat(results_dir, "/", seq.name, ".txt");
            if (!fs::is_regular_file(path)) throw ConfigError(cat("no results file ", path));
            auto boxes = read_result_file(path);
            if (boxes.size() != seq.size())
                throw Error(cat(path, ": ", boxes.size(), " boxes for ", seq.size(), " frames"));
            rows.push_back(sequence_metrics(seq.name, boxes, seq.gt));
            add_curves(seq.name, boxes, seq.gt);
        }
        report = make_report(std::move(rows), "plain");
    } else {
        TrackModel model = load_model_checked(cfg);
        EmbeddedVocabulary ev = load_vocab_checked(cfg, model);
        Tracker tracker(model, ev, track_options(cfg));

        if (protocol == "plain") {
            std::vector<SequenceMetrics> rows;
            std::ofstream consistency(cat(cfg.out, "/consistency.csv"));
            consistency << "sequence,classes,color,material,texture\n";
            for (const auto& seq : seqs) {
                TrackRun run = run_tracker(tracker, seq);
                rows.push_back(sequence_metrics(seq.name, run.boxes, seq.gt));
                add_curves(seq.name, run.boxes, seq.gt);
                auto cons = description_consistency(run.labels);
                consistency << seq.name << "," << cons[0] << "," << cons[1] << "," << cons[2]
                            << "," << cons[3] << "\n";
            }
            report = make_report(std::move(rows), "plain");
        } else if (protocol == "tre") {
            std::vector<SequenceMetrics> rows;
            double worst = 2.0;
            for (const auto& seq : seqs) {
                MetricReport r = run_tre(tracker, seq);
                rows.insert(rows.end(), r.rows.begin(), r.rows.end());
                worst = std::min(worst, r.tre_worst_auc);
            }
            report = make_report(std::move(rows), "tre");
            report.tre_worst_auc = worst;
        } else if (protocol == "sre-shift" || protocol == "sre-scale") {
            SreMode mode = protocol == "sre-shift" ? SreMode::shift : SreMode::scale;
            std::vector<SequenceMetrics> rows;
            for (const auto& seq : seqs) {
                MetricReport r = run_sre(tracker, seq, mode);
                rows.insert(rows.end(), r.rows.begin(), r.rows.end());
            }
            report = make_report(std::move(rows), protocol);
        } else {
            throw ConfigError(cat("unknown protocol '", protocol, "'"));
        }
    }

    write_report(cat(cfg.out, "/report.txt"), report);
    if (!success_curves.empty()) {
        write_curve_csv(cat(cfg.out, "/success_curves.csv"), success_curves);
        write_curve_csv(cat(cfg.out, "/precision_curves.csv"), precision_curves);
        write_curve_svg(cat(cfg.out, "/success_plot.svg"), "Success plot", "IoU threshold",
                        "success rate", success_curves);
        write_curve_svg(cat(cfg.out, "/precision_plot.svg"), "Precision plot",
                        "center error threshold (px)", "precision", precision_curves);
    }
    std::cout << "protocol " << report.protocol << ": AUC " << report.aggregate.auc << " P "
              << report.aggregate.p << " P_norm " << report.aggregate.pnorm << " AO "
              << report.aggregate.ao << " SR0.5 " << report.aggregate.sr50 << " SR0.75 "
              << report.aggregate.sr75;
    if (report.tre_worst_auc >= 0) std::cout << " TRE-worst " << report.tre_worst_auc;
    std::cout << "\nreport: " << cfg.out << "/report.txt\n";
    return 0;
}

int cmd_plot(const std::string& curves_path, const std::string& out_path,
             const std::string& title, const std::string& xl, const std::string& yl) {
    if (!fs::is_regular_file(curves_path)) throw ConfigError(cat("no curve file ", curves_path));
    write_curve_svg(out_path, title, xl, yl, read_curve_csv(curves_path));
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"text-description correlation tracker"};
    app.require_subcommand(1);

    // --config is applied first; flags and VLTRACK_* env vars override it
    std::string config_path;
    for (int i = 1; i < argc - 1; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    bool no_window = false, no_text = false;
    int search_size = cfg.model.search_size, template_size = cfg.model.template_size;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run config");
        cmd->add_option("--seed", cfg.seed, "master seed")->envname("VLTRACK_SEED");
        cmd->add_option("--weights", cfg.weights, "model weights file")->envname("VLTRACK_WEIGHTS");
        cmd->add_option("--vocab", cfg.vocab, "vocabulary file")->envname("VLTRACK_VOCAB");
        cmd->add_option("--dataset", cfg.dataset, "dataset directory or synth spec")
            ->envname("VLTRACK_DATASET");
        cmd->add_option("--format", cfg.format, "dataset format: otb, got10k, synth")
            ->envname("VLTRACK_FORMAT");
        cmd->add_option("--out", cfg.out, "output directory")->envname("VLTRACK_OUT");
        cmd->add_flag("--no-window", no_window, "disable the cosine score window")
            ->envname("VLTRACK_NO_WINDOW");
        cmd->add_flag("--no-text", no_text, "disable the text branch (vision-only)")
            ->envname("VLTRACK_NO_TEXT");
        cmd->add_option("--search-size", search_size, "search crop resolution")
            ->envname("VLTRACK_SEARCH_SIZE");
        cmd->add_option("--template-size", template_size, "template crop resolution")
            ->envname("VLTRACK_TEMPLATE_SIZE");
    };

    auto* track = app.add_subcommand("track", "run the tracker over sequences");
    add_common(track);

    auto* train = app.add_subcommand("train-toy", "train on synthetic sequences");
    add_common(train);
    train->add_option("--iterations", cfg.train.iterations, "training iterations")
        ->envname("VLTRACK_ITERATIONS");
    train->add_option("--batch", cfg.train.batch, "batch size")->envname("VLTRACK_BATCH");
    train->add_option("--lr", cfg.train.lr, "learning rate")->envname("VLTRACK_LR");

    std::string image_path, box_arg;
    auto* describe = app.add_subcommand("describe", "describe a target patch");
    add_common(describe);
    describe->add_option("--image", image_path, "PPM image")->required();
    describe->add_option("--box", box_arg, "target box x,y,w,h")->required();

    std::string results_dir, protocol = "plain";
    auto* eval = app.add_subcommand("eval", "evaluate results or run a protocol");
    add_common(eval);
    eval->add_option("--results", results_dir, "directory of per-sequence result files");
    eval->add_option("--protocol", protocol, "plain, tre, sre-shift, sre-scale");

    std::string curves_path, svg_path = "plot.svg", title = "Curves", xl = "x", yl = "y";
    auto* plot = app.add_subcommand("plot", "render a curve CSV as SVG");
    plot->add_option("--curves", curves_path, "curve CSV file")->required();
    plot->add_option("--svg", svg_path, "output SVG path");
    plot->add_option("--title", title, "plot title");
    plot->add_option("--xlabel", xl, "x axis label");
    plot->add_option("--ylabel", yl, "y axis label");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        cfg.model.search_size = search_size;
        cfg.model.template_size = template_size;
        if (no_window) cfg.window = false;
        if (no_text) cfg.text = false;

        if (track->parsed()) return cmd_track(cfg);
        if (train->parsed()) return cmd_train_toy(cfg);
        if (describe->parsed()) return cmd_describe(cfg, image_path, box_arg);
        if (eval->parsed()) return cmd_eval(cfg, results_dir, protocol);
        if (plot->parsed()) return cmd_plot(curves_path, svg_path, title, xl, yl);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
