#include "vltrack/model.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace vltrack {

TrackModel TrackModel::init(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    TrackModel m;
    m.cfg = cfg;
    m.img_enc = init_image_encoder(cfg, rng);
    m.txt_enc = init_text_encoder(cfg, rng);
    m.backbone = init_backbone(cfg, rng);
    m.prompt = init_prompt_context(cfg, rng);
    m.proj = init_projections(cfg, rng);
    m.head = init_head(cfg, rng);
    return m;
}

void TrackModel::visit(const ParamVisitor& v) {
    img_enc.visit("img_enc", v);
    txt_enc.visit("txt_enc", v);
    backbone.visit("backbone", v);
    prompt.visit("prompt", v);
    proj.visit("proj", v);
    head.visit("head", v);
}

std::vector<Mat*> TrackModel::parameters() {
    std::vector<Mat*> out;
    visit([&](const std::string&, Mat& m) { out.push_back(&m); });
    return out;
}

void TrackModel::clamp_constraints() {
    // temperature must stay positive
    if (prompt.tau(0, 0) < 1e-3) prompt.tau(0, 0) = 1e-3;
}

namespace {

constexpr uint32_t kMagic = 0x57544c56;  // "VLTW"
constexpr uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error(cat("weights: truncated file ", path));
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<uint64_t>(os, s.size());
    os.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& is, const std::string& path) {
    auto n = read_pod<uint64_t>(is, path);
    std::string s(n, '\0');
    is.read(s.data(), std::streamsize(n));
    if (!is) throw Error(cat("weights: truncated file ", path));
    return s;
}

}  // namespace

void save_weights(const std::string& path, TrackModel& model) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(cat("weights: cannot open ", path, " for writing"));
    write_pod(f, kMagic);
    write_pod(f, kVersion);
    write_string(f, model.cfg.to_json());

    uint64_t count = 0;
    model.visit([&](const std::string&, Mat&) { ++count; });
    write_pod(f, count);
    model.visit([&](const std::string& name, Mat& m) {
        write_string(f, name);
        write_pod<uint64_t>(f, uint64_t(m.rows()));
        write_pod<uint64_t>(f, uint64_t(m.cols()));
        f.write(reinterpret_cast<const char*>(m.data()), std::streamsize(sizeof(double) * size_t(m.size())));
    });
    if (!f) throw Error(cat("weights: failed writing ", path));
}

TrackModel load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(cat("weights: cannot open ", path));
    if (read_pod<uint32_t>(f, path) != kMagic) throw Error(cat("weights: ", path, ": bad magic"));
    auto version = read_pod<uint32_t>(f, path);
    if (version != kVersion)
        throw Error(cat("weights: ", path, ": unsupported version ", version));
    ModelConfig cfg = ModelConfig::from_json(read_string(f, path));

    TrackModel model = TrackModel::init(cfg, 0);
    std::map<std::string, Mat*> by_name;
    model.visit([&](const std::string& name, Mat& m) { by_name[name] = &m; });

    auto count = read_pod<uint64_t>(f, path);
    if (count != by_name.size())
        throw Error(cat("weights: ", path, ": has ", count, " arrays, model needs ",
                        by_name.size()));
    for (uint64_t i = 0; i < count; ++i) {
        std::string name = read_string(f, path);
        auto rows = read_pod<uint64_t>(f, path);
        auto cols = read_pod<uint64_t>(f, path);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw Error(cat("weights: ", path, ": unknown array '", name, "'"));
        Mat& m = *it->second;
        if (uint64_t(m.rows()) != rows || uint64_t(m.cols()) != cols)
            throw Error(cat("weights: ", path, ": array '", name, "' is ", rows, "x", cols,
                            ", model expects ", m.rows(), "x", m.cols()));
        f.read(reinterpret_cast<char*>(m.data()), std::streamsize(sizeof(double) * size_t(m.size())));
        if (!f) throw Error(cat("weights: truncated file ", path));
    }
    return model;
}

}  // namespace vltrack
