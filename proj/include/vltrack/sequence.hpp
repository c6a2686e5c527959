#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vltrack/geometry.hpp"
#include "vltrack/image.hpp"

namespace vltrack {

// One video with per-frame ground truth. Frames either live on disk (paths)
// or in memory (synthetic sequences); exactly one of the two is populated.
struct Sequence {
    std::string name;
    std::vector<std::string> frame_paths;
    std::vector<Image> frames;
    std::vector<std::optional<Box>> gt;  // absent boxes are excluded from metrics

    size_t size() const { return frame_paths.empty() ? frames.size() : frame_paths.size(); }
    bool in_memory() const { return frame_paths.empty(); }
    Image frame(size_t i) const;

    void validate() const;  // >= 1 frame, gt present for the first frame
};

enum class DatasetFormat { otb, got10k };

DatasetFormat parse_format(const std::string& s);  // "otb" / "got10k"

// Reads a sequence directory: frames plus the annotation file. OTB boxes are
// 1-based and converted to 0-based; GOT-10k boxes are 0-based floats with an
// optional absence.label file marking frames without a visible target.
Sequence parse_sequence(const std::string& dir, DatasetFormat format);

// Tracking results: one `x,y,w,h` line per frame, frame pixels.
void write_result_file(const std::string& path, const std::vector<Box>& boxes);
std::vector<Box> read_result_file(const std::string& path);  // errors carry line numbers

}  // namespace vltrack
