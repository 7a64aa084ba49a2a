#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairnre/types.hpp"

namespace fairnre::embeddings {

inline const std::string kUnkToken = "<unk>";
inline const std::string kPadToken = "<pad>";

class Vocabulary {
  public:
    static constexpr int kUnkId = 0;
    static constexpr int kPadId = 1;

    Vocabulary() : Vocabulary(std::vector<std::string>{}, std::vector<long>{}) {}

    // words/counts exclude the specials, which are prepended here.
    Vocabulary(std::vector<std::string> words, std::vector<long> counts) {
        words_.reserve(words.size() + 2);
        counts_.reserve(words.size() + 2);
        words_.push_back(kUnkToken);
        words_.push_back(kPadToken);
        counts_.push_back(0);
        counts_.push_back(0);
        for (std::size_t i = 0; i < words.size(); ++i) {
            words_.push_back(std::move(words[i]));
            counts_.push_back(i < counts.size() ? counts[i] : 0);
        }
        for (std::size_t i = 0; i < words_.size(); ++i)
            index_.emplace(words_[i], static_cast<int>(i));
    }

    int size() const { return static_cast<int>(words_.size()); }

    // UNK for out-of-vocabulary words
    int id_of(const std::string& w) const {
        auto it = index_.find(w);
        return it == index_.end() ? kUnkId : it->second;
    }

    bool contains(const std::string& w) const { return index_.count(w) > 0; }
    const std::string& word(int id) const { return words_[static_cast<std::size_t>(id)]; }
    long count(int id) const { return counts_[static_cast<std::size_t>(id)]; }
    const std::vector<std::string>& words() const { return words_; }

  private:
    std::vector<std::string> words_;
    std::vector<long> counts_;
    std::unordered_map<std::string, int> index_;
};

// Words with corpus frequency >= min_count, sorted by descending count then
// lexicographically; UNK and PAD are prepended at indices 0 and 1.
inline Vocabulary build_vocabulary(const std::vector<Instance>& instances, int min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::unordered_map<std::string, long> freq;
    long total = 0;
    for (const Instance& inst : instances)
        for (const std::string& t : inst.tokens) {
            ++freq[t];
            ++total;
        }
    if (total == 0) throw DataError("cannot build vocabulary from an empty corpus");

    std::vector<std::pair<std::string, long>> kept;
    for (auto& [w, c] : freq)
        if (c >= min_count && w != kUnkToken && w != kPadToken) kept.emplace_back(w, c);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> words;
    std::vector<long> counts;
    words.reserve(kept.size());
    counts.reserve(kept.size());
    for (auto& [w, c] : kept) {
        words.push_back(std::move(w));
        counts.push_back(c);
    }
    return Vocabulary(std::move(words), std::move(counts));
}

}  // namespace fairnre::embeddings
