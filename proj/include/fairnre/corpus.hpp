#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fairnre/rng.hpp"
#include "fairnre/text.hpp"
#include "fairnre/types.hpp"

namespace fairnre::corpus {

enum class MatchMode { full, any_token };

inline MatchMode parse_match_mode(const std::string& s) {
    if (s == "full") return MatchMode::full;
    if (s == "any-token" || s == "any_token") return MatchMode::any_token;
    throw ConfigError("unknown match mode: '" + s + "' (expected full|any-token)");
}

struct AlignResult {
    std::vector<Instance> instances;
    std::vector<KnowledgeTriple> skipped_triples;  // head_id absent from articles
};

namespace detail {

inline constexpr std::size_t kAnyTokenMinLen = 3;

inline std::vector<std::string> surface_tokens(const std::string& surface) {
    std::vector<std::string> out;
    for (const std::string& t : tokenize_whitespace(surface)) {
        std::string s = lowercase(strip_punct(t));
        if (!s.empty()) out.push_back(std::move(s));
    }
    return out;
}

struct PreparedSentence {
    std::vector<std::string> tokens;          // original tokens
    std::vector<std::string> stripped;        // lowercased, punctuation-stripped (may be empty)
    std::vector<int> word_positions;          // indices of tokens whose stripped form is non-empty
};

inline PreparedSentence prepare_sentence(std::vector<std::string> tokens) {
    PreparedSentence p;
    p.tokens = std::move(tokens);
    p.stripped.reserve(p.tokens.size());
    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        p.stripped.push_back(lowercase(strip_punct(p.tokens[i])));
        if (!p.stripped.back().empty()) p.word_positions.push_back(static_cast<int>(i));
    }
    return p;
}

// Returns the original index of the first token of the tail match, or -1.
inline int match_tail(const PreparedSentence& sent, const std::vector<std::string>& tail,
                      MatchMode mode) {
    if (tail.empty()) return -1;
    if (mode == MatchMode::any_token) {
        for (std::size_t i = 0; i < sent.stripped.size(); ++i) {
            if (sent.stripped[i].empty()) continue;
            for (const std::string& t : tail) {
                if (t.size() >= kAnyTokenMinLen && sent.stripped[i] == t)
                    return static_cast<int>(i);
            }
        }
        return -1;
    }
    // full: contiguous subsequence over the punctuation-filtered token view
    const auto& wp = sent.word_positions;
    if (tail.size() > wp.size()) return -1;
    for (std::size_t start = 0; start + tail.size() <= wp.size(); ++start) {
        bool ok = true;
        for (std::size_t k = 0; k < tail.size(); ++k) {
            if (sent.stripped[static_cast<std::size_t>(wp[start + k])] != tail[k]) {
                ok = false;
                break;
            }
        }
        if (ok) return wp[start];
    }
    return -1;
}

inline int match_head(const PreparedSentence& sent, const std::vector<std::string>& head) {
    for (std::size_t i = 0; i < sent.stripped.size(); ++i) {
        if (sent.stripped[i].empty()) continue;
        for (const std::string& h : head) {
            if (sent.stripped[i] == h) return static_cast<int>(i);
        }
    }
    return -1;  // caller falls back to token 0 (pronoun-subject sentences)
}

}  // namespace detail

// Distant supervision: every sentence of the head's article that mentions the
// triple's tail yields one instance. Negative triple relations (parents,
// deathDate, almaMater) are labelled NA. Output order is deterministic:
// sorted by head_id, then sentence index, then triple index.
inline AlignResult align_distant(const std::vector<EntityArticle>& articles,
                                 const std::vector<KnowledgeTriple>& triples,
                                 MatchMode mode = MatchMode::any_token,
                                 bool pre_segmented = false) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        if (!by_id.emplace(articles[i].entity_id, i).second)
            throw DataError("duplicate entity_id in articles: " + articles[i].entity_id);
    }

    std::vector<std::vector<detail::PreparedSentence>> sentence_cache(articles.size());
    std::vector<bool> segmented(articles.size(), false);
    auto sentences_of = [&](std::size_t ai) -> const std::vector<detail::PreparedSentence>& {
        if (!segmented[ai]) {
            std::vector<std::vector<std::string>> sents;
            if (pre_segmented) {
                std::size_t pos = 0;
                const std::string& text = articles[ai].text;
                while (pos <= text.size()) {
                    std::size_t nl = text.find('\n', pos);
                    std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
                    auto toks = tokenize_whitespace(line);
                    if (!toks.empty()) sents.push_back(std::move(toks));
                    if (nl == std::string::npos) break;
                    pos = nl + 1;
                }
            } else {
                sents = segment_sentences(articles[ai].text);
            }
            auto& cache = sentence_cache[ai];
            cache.reserve(sents.size());
            for (auto& s : sents) cache.push_back(detail::prepare_sentence(std::move(s)));
            segmented[ai] = true;
        }
        return sentence_cache[ai];
    };

    struct Keyed {
        std::string head_id;
        int sent_idx;
        std::size_t triple_idx;
        Instance inst;
    };
    std::vector<Keyed> keyed;
    AlignResult res;

    for (std::size_t ti = 0; ti < triples.size(); ++ti) {
        const KnowledgeTriple& tr = triples[ti];
        Relation label = triple_relation_label(tr.relation_name);
        auto it = by_id.find(tr.head_id);
        if (it == by_id.end()) {
            res.skipped_triples.push_back(tr);
            continue;
        }
        const EntityArticle& art = articles[it->second];
        std::vector<std::string> tail_toks = detail::surface_tokens(tr.tail_surface);
        std::vector<std::string> head_toks = detail::surface_tokens(art.name);
        const auto& sents = sentences_of(it->second);
        for (std::size_t si = 0; si < sents.size(); ++si) {
            int tail_at = detail::match_tail(sents[si], tail_toks, mode);
            if (tail_at < 0) continue;
            int head_at = detail::match_head(sents[si], head_toks);
            Instance inst;
            inst.instance_id = tr.head_id + ":" + tr.relation_name + ":t" + std::to_string(ti) +
                               ":s" + std::to_string(si);
            inst.head_id = tr.head_id;
            inst.tail_surface = tr.tail_surface;
            inst.relation = label;
            inst.gender = art.gender;
            inst.tokens = sents[si].tokens;
            inst.head_anchor = head_at < 0 ? 0 : head_at;
            inst.tail_anchor = tail_at;
            keyed.push_back({tr.head_id, static_cast<int>(si), ti, std::move(inst)});
        }
    }

    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.head_id != b.head_id) return a.head_id < b.head_id;
        if (a.sent_idx != b.sent_idx) return a.sent_idx < b.sent_idx;
        return a.triple_idx < b.triple_idx;
    });
    res.instances.reserve(keyed.size());
    for (auto& k : keyed) res.instances.push_back(std::move(k.inst));
    return res;
}

namespace detail {

struct HeadGroup {
    std::string head_id;
    Gender gender;
    std::vector<std::size_t> indices;  // into the instance vector
};

inline std::vector<HeadGroup> group_by_head(const std::vector<Instance>& instances) {
    std::vector<HeadGroup> groups;
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        auto it = pos.find(instances[i].head_id);
        if (it == pos.end()) {
            pos.emplace(instances[i].head_id, groups.size());
            groups.push_back({instances[i].head_id, instances[i].gender, {i}});
        } else {
            groups[it->second].indices.push_back(i);
        }
    }
    return groups;
}

}  // namespace detail

struct SplitResult {
    DatasetSplit train, dev, test;
    std::vector<std::string> warnings;
};

// Partition head entities into head-disjoint train/dev/test splits, shuffled
// by seed and stratified by gender so small corpora keep both genders in
// every split. The test split is then gender-equalized by dropping whole
// majority-gender head groups until the counts differ by less than 5%.
inline SplitResult split_by_head(const std::vector<Instance>& instances,
                                 const std::array<double, 3>& ratios, std::uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1 (got " + std::to_string(sum) + ")");
    for (double r : ratios)
        if (r < 0.0) throw ConfigError("split ratios must be non-negative");

    auto groups = detail::group_by_head(instances);
    if (groups.size() < 3) throw DataError("need at least 3 distinct head entities to split");

    Rng rng(seed);
    std::array<std::vector<std::size_t>, 2> by_gender;  // group indices
    for (std::size_t g = 0; g < groups.size(); ++g)
        by_gender[static_cast<int>(groups[g].gender)].push_back(g);
    rng.shuffle(by_gender[0]);
    rng.shuffle(by_gender[1]);

    // 0=train 1=dev 2=test
    std::array<std::unordered_set<std::string>, 3> split_heads;
    for (const auto& gender_groups : by_gender) {
        double total = 0;
        for (std::size_t gi : gender_groups) total += static_cast<double>(groups[gi].indices.size());
        std::array<double, 3> assigned = {0, 0, 0};
        for (std::size_t gi : gender_groups) {
            int best = 0;
            double best_deficit = ratios[0] * total - assigned[0];
            for (int s = 1; s < 3; ++s) {
                double d = ratios[s] * total - assigned[s];
                if (d > best_deficit) {
                    best_deficit = d;
                    best = s;
                }
            }
            assigned[best] += static_cast<double>(groups[gi].indices.size());
            split_heads[best].insert(groups[gi].head_id);
        }
    }

    SplitResult res;
    res.train.name = SplitName::train;
    res.dev.name = SplitName::dev;
    res.test.name = SplitName::test;

    // Gender-equalize the test split by removing whole majority-gender heads.
    {
        std::array<std::vector<std::size_t>, 2> test_groups;
        std::array<long, 2> counts = {0, 0};
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (!split_heads[2].count(groups[g].head_id)) continue;
            int gi = static_cast<int>(groups[g].gender);
            test_groups[gi].push_back(g);
            counts[gi] += static_cast<long>(groups[g].indices.size());
        }
        if (counts[0] == 0 || counts[1] == 0) {
            res.warnings.push_back("test equalization impossible: only one gender present; keeping all instances");
        } else {
            int maj = counts[0] >= counts[1] ? 0 : 1;
            int min_g = 1 - maj;
            rng.shuffle(test_groups[maj]);
            std::size_t k = 0;
            while (static_cast<double>(counts[maj]) >= 1.05 * static_cast<double>(counts[min_g]) &&
                   k < test_groups[maj].size()) {
                std::size_t g = test_groups[maj][k++];
                counts[maj] -= static_cast<long>(groups[g].indices.size());
                split_heads[2].erase(groups[g].head_id);
            }
            long hi = std::max(counts[0], counts[1]);
            long lo = std::min(counts[0], counts[1]);
            if (lo > 0 && static_cast<double>(hi) >= 1.05 * static_cast<double>(lo))
                res.warnings.push_back("test split still gender-imbalanced by >=5% after head-level downsampling");
        }
    }

    for (const Instance& inst : instances) {
        if (split_heads[0].count(inst.head_id)) res.train.instances.push_back(inst);
        else if (split_heads[1].count(inst.head_id)) res.dev.instances.push_back(inst);
        else if (split_heads[2].count(inst.head_id)) res.test.instances.push_back(inst);
    }

    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            for (const auto& h : split_heads[a])
                if (split_heads[b].count(h)) throw std::logic_error("split head overlap: " + h);
    return res;
}

// Downsample whole majority-gender head groups (shuffled by seed) until that
// gender's instance count first falls to at most 1.01x the minority count.
// Minority instances are never touched.
inline DatasetSplit equalize_split(const DatasetSplit& split, std::uint64_t seed) {
    std::array<long, 2> counts = {0, 0};
    for (const Instance& inst : split.instances) counts[static_cast<int>(inst.gender)]++;
    if (counts[0] == 0 || counts[1] == 0)
        throw DataError("nothing to equalize: split contains a single gender");

    int maj = counts[0] >= counts[1] ? 0 : 1;
    int min_g = 1 - maj;
    if (static_cast<double>(counts[maj]) <= 1.01 * static_cast<double>(counts[min_g])) return split;

    auto groups = detail::group_by_head(split.instances);
    std::vector<std::size_t> maj_groups;
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (static_cast<int>(groups[g].gender) == maj) maj_groups.push_back(g);

    Rng rng(seed);
    rng.shuffle(maj_groups);
    std::unordered_set<std::string> removed;
    long maj_count = counts[maj];
    std::size_t k = 0;
    while (static_cast<double>(maj_count) > 1.01 * static_cast<double>(counts[min_g]) &&
           k < maj_groups.size()) {
        const auto& g = groups[maj_groups[k++]];
        maj_count -= static_cast<long>(g.indices.size());
        removed.insert(g.head_id);
    }

    DatasetSplit out;
    out.name = split.name;
    for (const Instance& inst : split.instances)
        if (!removed.count(inst.head_id)) out.instances.push_back(inst);
    return out;
}

struct AnnotateResult {
    DatasetSplit split;
    std::vector<std::string> skipped_ids;  // annotated ids not present in the split
};

// Majority-vote adjudication: instances whose majority answer is "no" are
// relabelled NA; everything else is unchanged.
inline AnnotateResult apply_test_annotations(
    const DatasetSplit& split,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& annotations) {
    AnnotateResult res;
    res.split = split;
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < res.split.instances.size(); ++i)
        by_id.emplace(res.split.instances[i].instance_id, i);

    for (const auto& [id, votes] : annotations) {
        if (votes.size() % 2 == 0)
            throw DataError("even vote count for '" + id + "': no majority guaranteed");
        if (votes.size() < 3)
            throw DataError("need at least 3 votes for '" + id + "'");
        long yes = 0, no = 0;
        for (const std::string& v : votes) {
            if (v == "yes") ++yes;
            else if (v == "no") ++no;
            else throw DataError("vote must be yes|no, got '" + v + "' for '" + id + "'");
        }
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            res.skipped_ids.push_back(id);
            continue;
        }
        if (no > yes) res.split.instances[it->second].relation = Relation::na;
    }
    return res;
}

struct CorpusStats {
    // [gender][relation]
    std::array<std::array<long, kNumRelations>, 2> counts{};
    std::array<std::array<double, kNumRelations>, 2> proportions{};
    std::array<long, 2> totals{};
};

inline CorpusStats corpus_stats(const std::vector<Instance>& instances) {
    CorpusStats s;
    for (const Instance& inst : instances) {
        s.counts[static_cast<int>(inst.gender)][static_cast<int>(inst.relation)]++;
        s.totals[static_cast<int>(inst.gender)]++;
    }
    for (int g = 0; g < 2; ++g) {
        if (s.totals[g] == 0) continue;
        for (int r = 0; r < kNumRelations; ++r)
            s.proportions[g][r] =
                static_cast<double>(s.counts[g][r]) / static_cast<double>(s.totals[g]);
    }
    return s;
}

}  // namespace fairnre::corpus
