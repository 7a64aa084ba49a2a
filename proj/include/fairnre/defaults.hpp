#pragma once
// Built-in word lists for debiasing and gender-swap augmentation.  These are
// the defaults compiled into the toolkit; each list is also shipped as a data
// file (data/) and can be overridden with the corresponding CLI flag.

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fairnre::defaults {

// (female word, male word) pairs defining the gender subspace.
inline const std::vector<std::pair<std::string, std::string>>& definitional_pairs() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"she", "he"},       {"her", "him"},         {"woman", "man"},
        {"mother", "father"}, {"wife", "husband"},   {"daughter", "son"},
        {"girl", "boy"},      {"female", "male"},    {"herself", "himself"},
        {"mary", "john"},
    };
    return v;
}

// Gender-specific words exempt from neutralization.
inline const std::set<std::string>& gender_specific_words() {
    static const std::set<std::string> v = {
        "he",      "she",     "him",     "her",      "his",     "hers",   "himself", "herself",
        "man",     "woman",   "men",     "women",    "husband", "wife",   "father",  "mother",
        "son",     "daughter", "boy",    "girl",     "brother", "sister", "uncle",   "aunt",
        "nephew",  "niece",   "king",    "queen",    "prince",  "princess", "male",  "female",
        "mr",      "mrs",     "ms",      "sir",      "madam",   "lady",   "gentleman", "widow",
        "widower", "john",    "mary",    "groom",    "bride",   "dad",    "mom",
    };
    return v;
}

// Pairs symmetrized about the gender direction after neutralization.
inline const std::vector<std::pair<std::string, std::string>>& equalize_pairs() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"she", "he"},        {"her", "him"},       {"woman", "man"},   {"mother", "father"},
        {"wife", "husband"},  {"daughter", "son"},  {"girl", "boy"},    {"herself", "himself"},
        {"sister", "brother"}, {"aunt", "uncle"},   {"queen", "king"},  {"mrs", "mr"},
    };
    return v;
}

// Swap-lexicon pairs for counterfactual augmentation, in file order.  The
// (him,her) pair precedes (his,her), so under first-wins conflict handling
// the lexicon maps her->him and his->her (the documented "her" ambiguity
// resolution); all other entries are bidirectional.
inline const std::vector<std::pair<std::string, std::string>>& swap_pairs() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"he", "she"},         {"him", "her"},       {"his", "her"},
        {"himself", "herself"}, {"man", "woman"},    {"men", "women"},
        {"husband", "wife"},   {"father", "mother"}, {"son", "daughter"},
        {"boy", "girl"},       {"brother", "sister"}, {"uncle", "aunt"},
        {"nephew", "niece"},   {"king", "queen"},    {"prince", "princess"},
        {"mr", "mrs"},         {"sir", "madam"},     {"gentleman", "lady"},
        {"male", "female"},    {"widower", "widow"}, {"groom", "bride"},
        {"dad", "mom"},
    };
    return v;
}

}  // namespace fairnre::defaults
