#pragma once

#include <array>

#include "vltrack/sequence.hpp"

namespace vltrack {

enum class SynthShape { rectangle, ellipse };

// One moving solid-color shape on a smoothed-noise background; the walk is a
// bounded random step per frame, clamped so the box stays inside the frame.
struct SynthSpec {
    int frame_w = 256, frame_h = 256;
    int target_w = 64, target_h = 64;
    SynthShape shape = SynthShape::rectangle;
    std::string color = "red";
    int frames = 30;
    int max_step = 8;  // per-axis pixels per frame
    std::string name = "synth";
};

// RGB for the shipped color vocabulary; unknown names are an error.
std::array<double, 3> color_rgb(const std::string& name);

Sequence generate_synthetic_sequence(const SynthSpec& spec, uint64_t seed);

// A family of sequences cycling through colors and shapes; sequence i uses
// seed base_seed + i.
struct SynthSuiteSpec {
    int sequences = 20;
    SynthSpec base;
    std::vector<std::string> colors{"red", "green", "blue", "yellow"};
    std::vector<SynthShape> shapes{SynthShape::rectangle, SynthShape::ellipse};
    uint64_t base_seed = 1;
};

std::vector<Sequence> generate_synthetic_suite(const SynthSuiteSpec& spec);

SynthSuiteSpec load_synth_suite_spec(const std::string& path);
SynthSuiteSpec parse_synth_suite_spec(const std::string& text, const std::string& origin);

}  // namespace vltrack
