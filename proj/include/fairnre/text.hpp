#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

namespace fairnre {

inline std::vector<std::string> tokenize_whitespace(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Strip leading/trailing non-alphanumeric characters; used when matching
// entity surfaces against sentence tokens.
inline std::string strip_punct(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

namespace detail {

inline const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> abbr = {
        "dr",  "mr",  "mrs", "ms",  "prof", "st", "jr",   "sr",  "vs",  "etc",
        "inc", "ltd", "co",  "capt", "col", "gen", "lt",  "sgt", "rev", "hon",
        "fig", "no",  "mt",  "ft",  "approx", "dept", "est", "al"};
    return abbr;
}

// A trailing period is not sentence-terminal after an abbreviation, a single
// initial ("M.") or a dotted acronym ("U.S.").
inline bool period_is_abbreviation(const std::string& word_part) {
    if (word_part.empty()) return false;
    if (word_part.size() == 1 && std::isalpha(static_cast<unsigned char>(word_part[0]))) return true;
    if (word_part.find('.') != std::string::npos) return true;
    std::string w = lowercase(word_part);
    while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back()))) w.pop_back();
    return abbreviations().count(w) > 0;
}

inline bool starts_uppercase(const std::string& tok) {
    return !tok.empty() && std::isupper(static_cast<unsigned char>(tok[0]));
}

}  // namespace detail

// Rule-based sentence segmentation over whitespace tokens. A sentence ends at
// '.', '!' or '?' when it is followed by an uppercase-initial token or by the
// end of the text; sentence-final marks become their own token. Periods after
// abbreviations and initials never terminate. Concatenating all emitted
// tokens reproduces the input text minus whitespace.
inline std::vector<std::vector<std::string>> segment_sentences(const std::string& text) {
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::string> raw = tokenize_whitespace(text);
    std::vector<std::string> cur;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::string& tok = raw[i];
        char last = tok.back();
        bool candidate = (last == '.' || last == '!' || last == '?');
        if (!candidate) {
            cur.push_back(tok);
            continue;
        }
        bool at_end = (i + 1 == raw.size());
        bool next_upper = !at_end && detail::starts_uppercase(raw[i + 1]);
        bool terminal = at_end || next_upper;
        std::string word_part = tok.substr(0, tok.size() - 1);
        if (terminal && last == '.' && detail::period_is_abbreviation(word_part)) terminal = false;
        if (!terminal) {
            cur.push_back(tok);
            continue;
        }
        if (!word_part.empty()) cur.push_back(word_part);
        cur.push_back(std::string(1, last));
        sentences.push_back(std::move(cur));
        cur.clear();
    }
    if (!cur.empty()) sentences.push_back(std::move(cur));
    return sentences;
}

}  // namespace fairnre
