#include "vltrack/sequence.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vltrack {

namespace fs = std::filesystem;

Image Sequence::frame(size_t i) const {
    if (i >= size()) throw Error(cat("sequence ", name, ": frame ", i, " out of range"));
    if (in_memory()) return frames[i];
    return read_ppm(frame_paths[i]);
}

void Sequence::validate() const {
    if (size() == 0) throw Error(cat("sequence ", name, ": no frames"));
    if (gt.size() != size())
        throw Error(cat("sequence ", name, ": ", size(), " frames but ", gt.size(),
                        " annotations"));
    if (!gt[0].has_value()) throw Error(cat("sequence ", name, ": first frame has no ground truth"));
}

DatasetFormat parse_format(const std::string& s) {
    if (s == "otb") return DatasetFormat::otb;
    if (s == "got10k") return DatasetFormat::got10k;
    throw ConfigError(cat("unknown dataset format '", s, "' (expected otb or got10k)"));
}

namespace {

bool is_frame_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".ppm" || ext == ".bmp";
}

std::vector<std::string> list_frames(const fs::path& dir) {
    fs::path frame_dir = dir;
    if (fs::is_directory(dir / "img")) frame_dir = dir / "img";
    std::vector<std::string> out;
    if (!fs::is_directory(frame_dir)) return out;
    for (const auto& entry : fs::directory_iterator(frame_dir))
        if (entry.is_regular_file() && is_frame_file(entry.path()))
            out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::string find_annotation_file(const fs::path& dir) {
    for (const char* name : {"groundtruth_rect.txt", "groundtruth.txt"}) {
        fs::path p = dir / name;
        if (fs::is_regular_file(p)) return p.string();
    }
    throw Error(cat("parse_sequence: no annotation file in ", dir.string(),
                    " (expected groundtruth_rect.txt or groundtruth.txt)"));
}

Box parse_box_line(const std::string& line, const std::string& path, size_t lineno) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::replace(cleaned.begin(), cleaned.end(), '\t', ' ');
    std::istringstream ss(cleaned);
    double v[4];
    for (int i = 0; i < 4; ++i)
        if (!(ss >> v[i]))
            throw Error(cat(path, ":", lineno, ": malformed annotation line '", line, "'"));
    std::string rest;
    if (ss >> rest) throw Error(cat(path, ":", lineno, ": trailing data '", rest, "'"));
    return Box{v[0], v[1], v[2], v[3]};
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(cat("cannot open ", path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

Sequence parse_sequence(const std::string& dir, DatasetFormat format) {
    if (!fs::is_directory(dir)) throw Error(cat("parse_sequence: no such directory ", dir));
    Sequence seq;
    seq.name = fs::path(dir).filename().string();
    seq.frame_paths = list_frames(dir);

    std::string anno_path = find_annotation_file(dir);
    auto lines = read_lines(anno_path);
    seq.gt.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        Box b = parse_box_line(lines[i], anno_path, i + 1);
        if (format == DatasetFormat::otb) {
            b.x -= 1.0;  // 1-based pixel origin
            b.y -= 1.0;
        }
        seq.gt.push_back(b);
    }

    if (format == DatasetFormat::got10k) {
        fs::path absent = fs::path(dir) / "absence.label";
        if (fs::is_regular_file(absent)) {
            auto flags = read_lines(absent.string());
            if (flags.size() != seq.gt.size())
                throw Error(cat(absent.string(), ": ", flags.size(), " flags for ", seq.gt.size(),
                                " annotations"));
            for (size_t i = 0; i < flags.size(); ++i)
                if (flags[i] == "1") seq.gt[i].reset();
        }
    }

    if (!seq.frame_paths.empty() && seq.frame_paths.size() != seq.gt.size())
        throw Error(cat("parse_sequence: ", dir, ": ", seq.frame_paths.size(), " frames but ",
                        seq.gt.size(), " annotation lines"));
    seq.validate();
    return seq;
}

void write_result_file(const std::string& path, const std::vector<Box>& boxes) {
    std::ofstream f(path);
    if (!f) throw Error(cat("cannot open ", path, " for writing"));
    f.precision(4);
    f << std::fixed;
    for (const Box& b : boxes) f << b.x << "," << b.y << "," << b.w << "," << b.h << "\n";
    if (!f) throw Error(cat("failed writing ", path));
}

std::vector<Box> read_result_file(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<Box> out;
    out.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) out.push_back(parse_box_line(lines[i], path, i + 1));
    return out;
}

}  // namespace vltrack
