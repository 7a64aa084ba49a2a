#pragma once
// Shared helpers for the unit tests.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fairnre/embeddings.hpp"
#include "fairnre/types.hpp"
#include "fairnre/vocab.hpp"

namespace testutil {

inline fairnre::Instance make_instance(std::string id, std::string head_id, std::string tail,
                                       fairnre::Relation rel, fairnre::Gender gender,
                                       std::vector<std::string> tokens, int head_anchor,
                                       int tail_anchor) {
    fairnre::Instance inst;
    inst.instance_id = std::move(id);
    inst.head_id = std::move(head_id);
    inst.tail_surface = std::move(tail);
    inst.relation = rel;
    inst.gender = gender;
    inst.tokens = std::move(tokens);
    inst.head_anchor = head_anchor;
    inst.tail_anchor = tail_anchor;
    return inst;
}

inline fairnre::embeddings::Vocabulary make_vocab(const std::vector<std::string>& words) {
    std::vector<long> counts(words.size(), 100);
    return fairnre::embeddings::Vocabulary(std::vector<std::string>(words), std::move(counts));
}

inline fairnre::embeddings::EmbeddingMatrix make_embeddings(
    const fairnre::embeddings::Vocabulary& vocab, int dim, std::uint64_t seed = 7,
    double scale = 0.5) {
    fairnre::embeddings::EmbeddingMatrix m;
    m.vocab = vocab;
    m.dim = dim;
    m.data.resize(static_cast<std::size_t>(vocab.size()) * dim);
    fairnre::Rng rng(seed);
    for (double& v : m.data) v = rng.gaussian() * scale;
    return m;
}

// Fresh scratch directory under the test working directory.
class TempDir {
  public:
    explicit TempDir(const std::string& name) : path_("test_tmp_" + name) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string operator/(const std::string& leaf) const { return path_ + "/" + leaf; }
    const std::string& str() const { return path_; }

  private:
    std::string path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testutil
