#include "vltrack/synth.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace vltrack {

std::array<double, 3> color_rgb(const std::string& name) {
    if (name == "black") return {0.05, 0.05, 0.05};
    if (name == "white") return {0.95, 0.95, 0.95};
    if (name == "gray") return {0.55, 0.55, 0.55};
    if (name == "red") return {0.85, 0.10, 0.10};
    if (name == "green") return {0.10, 0.70, 0.15};
    if (name == "blue") return {0.10, 0.20, 0.85};
    if (name == "yellow") return {0.90, 0.85, 0.10};
    if (name == "orange") return {0.95, 0.55, 0.10};
    if (name == "purple") return {0.55, 0.15, 0.70};
    if (name == "pink") return {0.95, 0.60, 0.75};
    if (name == "brown") return {0.50, 0.30, 0.12};
    throw Error(cat("color_rgb: unknown color '", name, "'"));
}

namespace {

// Colored blob noise: a coarse random color grid at roughly target scale,
// bilinearly upsampled, plus fine per-pixel grain. The clutter makes plain
// blob detection ambiguous, so target identity has to come from appearance.
Image noise_background(int w, int h, Rng& rng) {
    const int cell = 24;
    int gw = w / cell + 2, gh = h / cell + 2;
    std::vector<std::array<double, 3>> grid(size_t(gw) * gh);
    for (auto& c : grid)
        for (int k = 0; k < 3; ++k) c[k] = rng.uniform(0.1, 0.9);

    Image img{w, h};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double gx = double(x) / cell, gy = double(y) / cell;
            int x0 = int(gx), y0 = int(gy);
            double ax = gx - x0, ay = gy - y0;
            for (int c = 0; c < 3; ++c) {
                double top = (1 - ax) * grid[size_t(y0) * gw + x0][c] +
                             ax * grid[size_t(y0) * gw + x0 + 1][c];
                double bot = (1 - ax) * grid[size_t(y0 + 1) * gw + x0][c] +
                             ax * grid[size_t(y0 + 1) * gw + x0 + 1][c];
                img.at(x, y, c) = (1 - ay) * top + ay * bot;
            }
        }
    for (auto& v : img.data) v = std::clamp(v + rng.uniform(-0.04, 0.04), 0.0, 1.0);
    return img;
}

}  // namespace

Sequence generate_synthetic_sequence(const SynthSpec& spec, uint64_t seed) {
    if (spec.frames < 1) throw Error("synth: frames must be >= 1");
    if (spec.target_w >= spec.frame_w || spec.target_h >= spec.frame_h)
        throw Error("synth: target must be smaller than the frame");
    auto rgb = color_rgb(spec.color);
    Rng rng(seed);
    Image background = noise_background(spec.frame_w, spec.frame_h, rng);

    Sequence seq;
    seq.name = spec.name;
    int max_x = spec.frame_w - spec.target_w;
    int max_y = spec.frame_h - spec.target_h;
    int x = int(rng.uniform_int(max_x / 4, 3 * max_x / 4));
    int y = int(rng.uniform_int(max_y / 4, 3 * max_y / 4));
    for (int f = 0; f < spec.frames; ++f) {
        if (f > 0) {
            x += int(rng.uniform_int(-spec.max_step, spec.max_step));
            y += int(rng.uniform_int(-spec.max_step, spec.max_step));
            x = std::clamp(x, 0, max_x);
            y = std::clamp(y, 0, max_y);
        }
        Box gt{double(x), double(y), double(spec.target_w), double(spec.target_h)};
        Image frame = background;
        if (spec.shape == SynthShape::rectangle)
            fill_rect(frame, gt, rgb);
        else
            fill_ellipse(frame, gt, rgb);
        seq.frames.push_back(std::move(frame));
        seq.gt.push_back(gt);
    }
    seq.validate();
    return seq;
}

std::vector<Sequence> generate_synthetic_suite(const SynthSuiteSpec& spec) {
    if (spec.colors.empty() || spec.shapes.empty())
        throw Error("synth suite: colors and shapes must be non-empty");
    std::vector<Sequence> out;
    out.reserve(size_t(spec.sequences));
    for (int i = 0; i < spec.sequences; ++i) {
        SynthSpec s = spec.base;
        s.color = spec.colors[size_t(i) % spec.colors.size()];
        s.shape = spec.shapes[size_t(i) % spec.shapes.size()];
        std::ostringstream name;
        name << s.name << "_" << (i < 10 ? "0" : "") << i << "_" << s.color;
        s.name = name.str();
        out.push_back(generate_synthetic_sequence(s, spec.base_seed + uint64_t(i)));
    }
    return out;
}

SynthSuiteSpec parse_synth_suite_spec(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(cat("synth spec ", origin, ": parse error: ", e.what()));
    }
    SynthSuiteSpec spec;
    auto get_int = [&](const char* key, int& field) {
        if (j.contains(key)) field = j.at(key).get<int>();
    };
    get_int("sequences", spec.sequences);
    get_int("frames", spec.base.frames);
    get_int("frame_size", spec.base.frame_w);
    spec.base.frame_h = spec.base.frame_w;
    get_int("target_size", spec.base.target_w);
    spec.base.target_h = spec.base.target_w;
    get_int("max_step", spec.base.max_step);
    if (j.contains("seed")) spec.base_seed = j.at("seed").get<uint64_t>();
    if (j.contains("name")) spec.base.name = j.at("name").get<std::string>();
    if (j.contains("colors")) spec.colors = j.at("colors").get<std::vector<std::string>>();
    if (j.contains("shapes")) {
        spec.shapes.clear();
        for (const auto& s : j.at("shapes")) {
            std::string v = s.get<std::string>();
            if (v == "rectangle")
                spec.shapes.push_back(SynthShape::rectangle);
            else if (v == "ellipse")
                spec.shapes.push_back(SynthShape::ellipse);
            else
                throw ConfigError(cat("synth spec ", origin, ": unknown shape '", v, "'"));
        }
    }
    for (const auto& c : spec.colors) color_rgb(c);  // validate names early
    return spec;
}

SynthSuiteSpec load_synth_suite_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(cat("synth spec: cannot open ", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_synth_suite_spec(ss.str(), path);
}

}  // namespace vltrack
