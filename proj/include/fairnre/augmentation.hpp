#pragma once
// Gender-swap counterfactual data augmentation: a bidirectional swap lexicon
// is applied token-wise to instance sentences, producing a mirrored copy of
// each training instance with the gender label flipped.

#include <cctype>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairnre/types.hpp"

namespace fairnre::augmentation {

struct SwapLexicon {
    std::map<std::string, std::string> map;  // lowercase -> lowercase

    bool has(const std::string& w) const { return map.count(w) != 0; }
    const std::string& at(const std::string& w) const { return map.at(w); }
};

namespace detail {

inline std::string lower_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool is_all_caps(const std::string& s) {
    bool has_alpha = false;
    for (unsigned char c : s) {
        if (std::isalpha(c)) {
            has_alpha = true;
            if (std::islower(c)) return false;
        }
    }
    return has_alpha;
}

// Re-applies the casing pattern of `original` to lowercase `replacement`:
// all-caps stays all-caps, an initial capital stays an initial capital,
// anything else comes out lowercase.
inline std::string restore_casing(const std::string& original, std::string replacement) {
    if (is_all_caps(original)) {
        for (char& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return replacement;
    }
    if (!original.empty() && std::isupper(static_cast<unsigned char>(original.front())) &&
        !replacement.empty()) {
        replacement.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
    }
    return replacement;
}

}  // namespace detail

// Builds the bidirectional swap map from word pairs.  Each pair (a, b)
// contributes a->b and b->a.  Exact duplicates are ignored with a warning.
// A key mapped to two different words is an error in strict mode; with
// `first_wins` the earlier mapping is kept and the conflict is reported as a
// warning.  Note that first-wins lexicons can be deliberately one-directional
// (e.g. his->her alongside her->him), in which case the involution property
// holds only for the conflict-free part of the map.
inline SwapLexicon validate_lexicon(const std::vector<std::pair<std::string, std::string>>& pairs,
                                    bool first_wins = false,
                                    std::vector<std::string>* warnings = nullptr) {
    SwapLexicon lex;
    auto insert = [&](const std::string& key, const std::string& val) {
        auto it = lex.map.find(key);
        if (it == lex.map.end()) {
            lex.map.emplace(key, val);
            return;
        }
        if (it->second == val) {
            if (warnings) warnings->push_back("duplicate mapping " + key + " -> " + val + " ignored");
            return;
        }
        if (!first_wins)
            throw DataError("swap lexicon conflict: " + key + " -> " + it->second + " vs " + key +
                            " -> " + val);
        if (warnings)
            warnings->push_back("conflict for '" + key + "': keeping " + key + " -> " + it->second +
                                ", dropping " + key + " -> " + val);
    };

    for (const auto& [raw_a, raw_b] : pairs) {
        std::string a = detail::lower_copy(raw_a);
        std::string b = detail::lower_copy(raw_b);
        if (a.empty() || b.empty()) throw DataError("swap lexicon pair contains an empty word");
        if (a == b) throw DataError("swap lexicon maps '" + a + "' to itself");
        insert(a, b);
        insert(b, a);
    }

    if (!first_wins) {
        for (const auto& [k, v] : lex.map) {
            auto back = lex.map.find(v);
            if (back == lex.map.end() || back->second != k)
                throw DataError("swap lexicon is not an involution at '" + k + "'");
        }
    }
    return lex;
}

// Token-wise swap with casing restoration; unmapped tokens pass through.
inline std::vector<std::string> swap_tokens(const std::vector<std::string>& tokens,
                                            const SwapLexicon& lex) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const std::string& tok : tokens) {
        std::string key = detail::lower_copy(tok);
        auto it = lex.map.find(key);
        if (it == lex.map.end()) {
            out.push_back(tok);
        } else {
            out.push_back(detail::restore_casing(tok, it->second));
        }
    }
    return out;
}

// Returns the original instances followed by their gender-swapped copies.
// Copies get "_aug" appended to the instance id and (by default) the flipped
// gender label; anchors are unchanged and the entity mention tokens at the
// anchor positions are never swapped.
inline DatasetSplit augment_split(const DatasetSplit& split, const SwapLexicon& lex,
                                  bool flip_gender = true) {
    DatasetSplit out;
    out.name = split.name;
    out.instances.reserve(split.instances.size() * 2);
    for (const Instance& inst : split.instances) out.instances.push_back(inst);
    for (const Instance& inst : split.instances) {
        Instance copy = inst;
        copy.instance_id += "_aug";
        if (flip_gender) copy.gender = flip(copy.gender);
        std::vector<std::string> swapped = swap_tokens(inst.tokens, lex);
        // Keep the entity mentions verbatim: names are never gender-swapped.
        if (inst.head_anchor >= 0 && inst.head_anchor < static_cast<int>(swapped.size()))
            swapped[inst.head_anchor] = inst.tokens[inst.head_anchor];
        if (inst.tail_anchor >= 0 && inst.tail_anchor < static_cast<int>(swapped.size()))
            swapped[inst.tail_anchor] = inst.tokens[inst.tail_anchor];
        copy.tokens = std::move(swapped);
        out.instances.push_back(std::move(copy));
    }
    return out;
}

}  // namespace fairnre::augmentation
