#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vltrack/common.hpp"

namespace vltrack {

// Order defines the label index used throughout (classes first, then the
// three attribute kinds).
enum class VocabKind { classes = 0, color = 1, material = 2, texture = 3 };

constexpr std::array<VocabKind, 4> kAllKinds{VocabKind::classes, VocabKind::color,
                                             VocabKind::material, VocabKind::texture};
constexpr std::array<VocabKind, 3> kAttributeKinds{VocabKind::color, VocabKind::material,
                                                   VocabKind::texture};

const char* kind_name(VocabKind k);

// Open vocabulary of object classes plus color/material/texture values.
// Immutable after load; label order is significant and stable.
struct Vocabulary {
    std::vector<std::string> classes;
    std::vector<std::string> color;
    std::vector<std::string> material;
    std::vector<std::string> texture;

    const std::vector<std::string>& labels(VocabKind k) const;

    bool operator==(const Vocabulary&) const = default;
};

// Loads the structured vocabulary file (UTF-8 JSON with the four arrays under
// keys "classes", "color", "material", "texture"; array order is preserved).
Vocabulary load_vocabulary(const std::string& path);
Vocabulary parse_vocabulary(const std::string& text, const std::string& origin);

// One token-embedding sequence (L_i x d_tok) per label, same order as the
// vocabulary it was built from.
struct LabelEmbeddings {
    std::vector<Eigen::MatrixXd> tokens;

    size_t size() const { return tokens.size(); }
};

// Maps a label string to its token embedding sequence (rows = tokens).
using TokenEmbedder = std::function<Eigen::MatrixXd(const std::string&)>;

std::array<LabelEmbeddings, 4> embed_labels(const Vocabulary& vocab, const TokenEmbedder& embedder);

// Deterministic word-level embedder: each whitespace-separated word maps to a
// fixed pseudo-random d_tok vector derived from a stable hash of the word.
struct HashTokenEmbedder {
    int d_tok;
    uint64_t seed;

    Eigen::MatrixXd operator()(const std::string& label) const;
};

// Vocabulary bundled with its embeddings, ready for description generation.
struct EmbeddedVocabulary {
    Vocabulary vocab;
    std::array<LabelEmbeddings, 4> embeddings;
};

EmbeddedVocabulary embed_vocabulary(Vocabulary vocab, const TokenEmbedder& embedder);

}  // namespace vltrack
