#include <doctest.h>

#include "test_paths.hpp"
#include "vltrack/vocab.hpp"

using namespace vltrack;

namespace {

const char* kMinimalVocab = R"({
  "classes": ["a", "b"],
  "color": ["red"],
  "material": ["wood"],
  "texture": ["smooth"]
})";

// one embedding vector per character, value = character code
Eigen::MatrixXd per_char_embedder(const std::string& label) {
    Eigen::MatrixXd m(Eigen::Index(label.size()), 2);
    for (size_t i = 0; i < label.size(); ++i) {
        m(Eigen::Index(i), 0) = double(label[i]);
        m(Eigen::Index(i), 1) = 1.0;
    }
    return m;
}

}  // namespace

TEST_CASE("shipped vocabulary has the 80 classes and three attribute kinds") {
    Vocabulary v = load_vocabulary(std::string(kDataDir) + "/vocab.json");
    CHECK(v.classes.size() == 80);
    CHECK(v.classes.front() == "person");
    CHECK(v.classes.back() == "toothbrush");
    CHECK(!v.color.empty());
    CHECK(!v.material.empty());
    CHECK(!v.texture.empty());
}

TEST_CASE("minimal vocabulary parses with order preserved") {
    Vocabulary v = parse_vocabulary(kMinimalVocab, "test");
    CHECK(v.classes == std::vector<std::string>{"a", "b"});
    CHECK(v.color == std::vector<std::string>{"red"});
    CHECK(v.labels(VocabKind::material) == std::vector<std::string>{"wood"});
}

TEST_CASE("two loads of the same file compare equal") {
    std::string path = std::string(kDataDir) + "/vocab.json";
    CHECK(load_vocabulary(path) == load_vocabulary(path));
}

TEST_CASE("vocabulary load errors are descriptive") {
    CHECK_THROWS_WITH_AS((void)load_vocabulary("no_such_vocab.json"),
                         doctest::Contains("cannot open"), Error);
    CHECK_THROWS_WITH_AS(
        (void)parse_vocabulary(R"({"classes":["a","a"],"color":["r"],"material":["m"],"texture":["t"]})", "t"),
        doctest::Contains("duplicate label 'a'"), Error);
    CHECK_THROWS_WITH_AS(
        (void)parse_vocabulary(R"({"classes":["a"],"color":["r"],"material":["m"]})", "t"),
        doctest::Contains("missing section 'texture'"), Error);
    CHECK_THROWS_WITH_AS(
        (void)parse_vocabulary(
            R"({"classes":["a"],"color":["r"],"material":["m"],"texture":["t"],"shape":["round"]})", "t"),
        doctest::Contains("unknown attribute kind 'shape'"), Error);
    CHECK_THROWS_WITH_AS(
        (void)parse_vocabulary(R"({"classes":[],"color":["r"],"material":["m"],"texture":["t"]})", "t"),
        doctest::Contains("empty"), Error);
    CHECK_THROWS_AS((void)parse_vocabulary("{not json", "t"), Error);
}

TEST_CASE("embed_labels preserves cardinality and order per kind") {
    Vocabulary v = parse_vocabulary(kMinimalVocab, "test");
    auto emb = embed_labels(v, per_char_embedder);
    REQUIRE(emb[size_t(VocabKind::classes)].size() == 2);
    CHECK(emb[size_t(VocabKind::classes)].tokens[0].rows() == 1);  // "a"
    CHECK(emb[size_t(VocabKind::classes)].tokens[1].rows() == 1);  // "b"
    CHECK(emb[size_t(VocabKind::classes)].tokens[0](0, 0) == double('a'));
    CHECK(emb[size_t(VocabKind::classes)].tokens[1](0, 0) == double('b'));
    CHECK(emb[size_t(VocabKind::color)].tokens[0].rows() == 3);  // "red"
}

TEST_CASE("embedding the shipped vocabulary keeps count and order") {
    Vocabulary v = load_vocabulary(std::string(kDataDir) + "/vocab.json");
    HashTokenEmbedder embedder{8, 17};
    auto emb = embed_labels(v, embedder);
    REQUIRE(emb[size_t(VocabKind::classes)].size() == 80);
    for (size_t i = 0; i < v.classes.size(); ++i) {
        Eigen::MatrixXd direct = embedder(v.classes[i]);
        CHECK(emb[size_t(VocabKind::classes)].tokens[i] == direct);
    }
}

TEST_CASE("hash embedder is deterministic and word-level") {
    HashTokenEmbedder e{16, 3};
    CHECK(e("traffic light") == e("traffic light"));
    CHECK(e("traffic light").rows() == 2);
    CHECK(e("traffic").row(0) == e("traffic light").row(0));
    CHECK(e("red") != e("blue"));

    HashTokenEmbedder other_seed{16, 4};
    CHECK(e("red") != other_seed("red"));
}

TEST_CASE("embedder failures name the label") {
    Vocabulary v = parse_vocabulary(kMinimalVocab, "test");
    auto failing = [](const std::string& label) -> Eigen::MatrixXd {
        if (label == "red") throw std::runtime_error("boom");
        return Eigen::MatrixXd::Ones(1, 2);
    };
    CHECK_THROWS_WITH_AS((void)embed_labels(v, failing), doctest::Contains("'red'"), Error);

    auto ragged = [](const std::string& label) -> Eigen::MatrixXd {
        return Eigen::MatrixXd::Ones(1, label == "b" ? 3 : 2);
    };
    CHECK_THROWS_WITH_AS((void)embed_labels(v, ragged), doctest::Contains("'b'"), Error);
}
