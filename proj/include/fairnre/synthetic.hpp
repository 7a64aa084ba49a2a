#pragma once
// Deterministic synthetic corpus generator with a planted trigger-token
// rule: every relation is signalled by a dedicated trigger word, except that
// spouse sentences degrade to the NA noise token ("met") with a per-gender
// reliability.  Because the rule is known exactly, generated corpora act as
// their own oracle for end-to-end model and fairness-metric checks.

#include <string>
#include <vector>

#include "fairnre/rng.hpp"
#include "fairnre/types.hpp"

namespace fairnre::synthetic {

struct SyntheticConfig {
    int heads = 600;  // one article per head; genders alternate
    double spouse_reliability_male = 0.95;   // P(spouse sentence carries its trigger)
    double spouse_reliability_female = 0.70;
    double gendered_noun_p = 0.3;  // chance a filler slot becomes man/woman etc.
    int filler_vocab = 40;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    std::vector<EntityArticle> articles;
    std::vector<KnowledgeTriple> triples;
};

namespace detail {

inline const std::vector<std::string>& occupations() {
    static const std::vector<std::string> v = {"politician", "scientist", "actor",   "writer",
                                               "painter",    "singer",    "dancer", "teacher"};
    return v;
}

}  // namespace detail

// Trigger tokens of the planted rule, exposed so tests can assert on them.
inline const char* kSpouseTrigger = "wedded";
inline const char* kHypernymTrigger = "renowned";
inline const char* kBirthDateTrigger = "born";
inline const char* kBirthPlaceTrigger = "raised";
inline const char* kNoiseToken = "met";  // NA sentences and unreliable spouse sentences

inline SyntheticData generate(const SyntheticConfig& cfg) {
    if (cfg.heads < 2) throw ConfigError("synthetic: need at least 2 heads");
    if (cfg.filler_vocab < 1) throw ConfigError("synthetic: filler_vocab must be >= 1");
    for (double p : {cfg.spouse_reliability_male, cfg.spouse_reliability_female, cfg.gendered_noun_p})
        if (p < 0.0 || p > 1.0) throw ConfigError("synthetic: probabilities must lie in [0,1]");

    Rng rng(cfg.seed);
    SyntheticData out;
    out.articles.reserve(cfg.heads);

    const std::vector<std::string> male_pronouns = {"he", "his", "him"};
    const std::vector<std::string> female_pronouns = {"she", "her"};
    const std::vector<std::string> male_nouns = {"man", "husband", "father"};
    const std::vector<std::string> female_nouns = {"woman", "wife", "mother"};

    for (int i = 0; i < cfg.heads; ++i) {
        bool male = i % 2 == 0;
        std::string num = std::to_string(i);
        std::string head_id = "e" + num;
        std::string name = (male ? "Adam" : "Anna") + num;

        auto filler_slot = [&]() -> std::string {
            if (rng.uniform() < cfg.gendered_noun_p) {
                const auto& nouns = male ? male_nouns : female_nouns;
                return nouns[static_cast<std::size_t>(rng.below(nouns.size()))];
            }
            return "flk" + std::to_string(rng.below(static_cast<std::uint64_t>(cfg.filler_vocab)));
        };
        auto sentence = [&](const std::string& trigger, const std::string& tail) {
            const auto& pronouns = male ? male_pronouns : female_pronouns;
            std::string s = name + " " + trigger + " " + tail + " and " +
                            pronouns[static_cast<std::size_t>(rng.below(pronouns.size()))];
            int extra = 1 + static_cast<int>(rng.below(2));
            for (int e = 0; e < extra; ++e) s += " " + filler_slot();
            return s + ".";
        };

        std::string spouse_tail = "taylor" + num;
        std::string hypernym_tail = detail::occupations()[i % detail::occupations().size()];
        std::string birth_date_tail = "date" + std::to_string(i % 50);
        std::string birth_place_tail = "city" + std::to_string(i % 30);
        std::string parent_tail = "parent" + num;
        std::string alma_tail = "uni" + std::to_string(i % 20);

        double reliability = male ? cfg.spouse_reliability_male : cfg.spouse_reliability_female;
        const char* spouse_token = rng.uniform() < reliability ? kSpouseTrigger : kNoiseToken;

        std::string text = sentence(spouse_token, spouse_tail);
        text += " " + sentence(kHypernymTrigger, hypernym_tail);
        text += " " + sentence(kBirthDateTrigger, birth_date_tail);
        text += " " + sentence(kBirthPlaceTrigger, birth_place_tail);
        text += " " + sentence(kNoiseToken, parent_tail);
        text += " " + sentence(kNoiseToken, alma_tail);

        out.articles.push_back({head_id, name, male ? Gender::male : Gender::female, text});
        out.triples.push_back({head_id, "spouse", spouse_tail});
        out.triples.push_back({head_id, "hypernym", hypernym_tail});
        out.triples.push_back({head_id, "birthDate", birth_date_tail});
        out.triples.push_back({head_id, "birthPlace", birth_place_tail});
        out.triples.push_back({head_id, "parents", parent_tail});
        out.triples.push_back({head_id, "almaMater", alma_tail});
    }
    return out;
}

}  // namespace fairnre::synthetic
