#include "vltrack/vocab.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace vltrack {

const char* kind_name(VocabKind k) {
    switch (k) {
        case VocabKind::classes: return "classes";
        case VocabKind::color: return "color";
        case VocabKind::material: return "material";
        case VocabKind::texture: return "texture";
    }
    return "?";
}

const std::vector<std::string>& Vocabulary::labels(VocabKind k) const {
    switch (k) {
        case VocabKind::classes: return classes;
        case VocabKind::color: return color;
        case VocabKind::material: return material;
        case VocabKind::texture: return texture;
    }
    throw Error("Vocabulary::labels: bad kind");
}

namespace {

std::vector<std::string> read_label_array(const nlohmann::json& j, const std::string& key,
                                          const std::string& origin) {
    if (!j.contains(key))
        throw Error(cat("vocabulary ", origin, ": missing section '", key, "'"));
    const auto& arr = j.at(key);
    if (!arr.is_array())
        throw Error(cat("vocabulary ", origin, ": section '", key, "' is not an array"));
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& item : arr) {
        if (!item.is_string())
            throw Error(cat("vocabulary ", origin, ": section '", key, "' has a non-string label"));
        std::string s = item.get<std::string>();
        if (!seen.insert(s).second)
            throw Error(cat("vocabulary ", origin, ": duplicate label '", s, "' in '", key, "'"));
        out.push_back(std::move(s));
    }
    if (out.empty()) throw Error(cat("vocabulary ", origin, ": section '", key, "' is empty"));
    return out;
}

}  // namespace

Vocabulary parse_vocabulary(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(cat("vocabulary ", origin, ": parse error: ", e.what()));
    }
    if (!j.is_object()) throw Error(cat("vocabulary ", origin, ": top level must be an object"));
    for (const auto& [key, _] : j.items()) {
        if (key != "classes" && key != "color" && key != "material" && key != "texture")
            throw Error(cat("vocabulary ", origin, ": unknown attribute kind '", key, "'"));
    }
    Vocabulary v;
    v.classes = read_label_array(j, "classes", origin);
    v.color = read_label_array(j, "color", origin);
    v.material = read_label_array(j, "material", origin);
    v.texture = read_label_array(j, "texture", origin);
    return v;
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(cat("vocabulary: cannot open ", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_vocabulary(ss.str(), path);
}

std::array<LabelEmbeddings, 4> embed_labels(const Vocabulary& vocab,
                                            const TokenEmbedder& embedder) {
    std::array<LabelEmbeddings, 4> out;
    Eigen::Index d_tok = -1;
    for (VocabKind k : kAllKinds) {
        LabelEmbeddings emb;
        for (const auto& label : vocab.labels(k)) {
            Eigen::MatrixXd tokens;
            try {
                tokens = embedder(label);
            } catch (const std::exception& e) {
                throw Error(cat("embed_labels: embedder failed on label '", label, "': ", e.what()));
            }
            if (tokens.rows() == 0)
                throw Error(cat("embed_labels: empty embedding for label '", label, "'"));
            if (d_tok < 0) d_tok = tokens.cols();
            if (tokens.cols() != d_tok)
                throw Error(cat("embed_labels: label '", label, "' has token dim ", tokens.cols(),
                                ", expected ", d_tok));
            emb.tokens.push_back(std::move(tokens));
        }
        out[size_t(k)] = std::move(emb);
    }
    return out;
}

Eigen::MatrixXd HashTokenEmbedder::operator()(const std::string& label) const {
    if (d_tok < 1) throw Error("HashTokenEmbedder: d_tok must be >= 1");
    std::vector<std::string> words;
    std::istringstream ss(label);
    std::string w;
    while (ss >> w) words.push_back(w);
    if (words.empty()) words.push_back(label);  // whitespace-only labels embed as one token

    Eigen::MatrixXd tokens(Eigen::Index(words.size()), d_tok);
    double scale = 1.0 / std::sqrt(double(d_tok));
    for (size_t i = 0; i < words.size(); ++i) {
        Rng rng(fnv1a64(words[i]) ^ (seed * 0x9e3779b97f4a7c15ull));
        for (int j = 0; j < d_tok; ++j) tokens(Eigen::Index(i), j) = scale * rng.normal();
    }
    return tokens;
}

EmbeddedVocabulary embed_vocabulary(Vocabulary vocab, const TokenEmbedder& embedder) {
    EmbeddedVocabulary ev;
    ev.embeddings = embed_labels(vocab, embedder);
    ev.vocab = std::move(vocab);
    return ev;
}

}  // namespace vltrack
