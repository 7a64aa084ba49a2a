#pragma once
// Fairness and performance metrics over bag-level prediction records:
// one-vs-rest P/R/F1 per relation split by gender, F1 and Equality-of-
// Opportunity gaps, Disparity Score, Performance Parity Score, Fleiss'
// kappa, and multi-run mean/standard-error aggregation.

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairnre/types.hpp"

namespace fairnre::metrics {

// Group axis for per-relation scores: the two genders plus the pooled view.
inline constexpr int kGroupMale = 0;
inline constexpr int kGroupFemale = 1;
inline constexpr int kGroupAll = 2;
inline constexpr int kNumGroups = 3;

inline const char* group_name(int g) {
    switch (g) {
        case kGroupMale: return "male";
        case kGroupFemale: return "female";
        default: return "all";
    }
}

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Degenerate denominators are reported as 0 with the flag cleared.
    bool precision_defined = true;
    bool recall_defined = true;
};

struct RelationGenderScores {
    // Positive relations only; NA participates in the confusion counts but is
    // never scored on its own.
    PRF prf[kNumPositiveRelations][kNumGroups];
    long group_records[kNumGroups] = {0, 0, 0};
};

namespace detail {

inline PRF make_prf(long tp, long fp, long fn) {
    PRF out;
    if (tp + fp == 0) {
        out.precision_defined = false;
    } else {
        out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
        out.recall_defined = false;
    } else {
        out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (out.precision + out.recall > 0.0)
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

}  // namespace detail

// One-vs-rest confusion counts per positive relation, per gender and pooled.
inline RelationGenderScores per_relation_scores(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw DataError("per_relation_scores: empty record set");
    long tp[kNumPositiveRelations][kNumGroups] = {};
    long fp[kNumPositiveRelations][kNumGroups] = {};
    long fn[kNumPositiveRelations][kNumGroups] = {};
    RelationGenderScores out;
    for (const PredictionRecord& rec : records) {
        int g = rec.gender == Gender::male ? kGroupMale : kGroupFemale;
        ++out.group_records[g];
        ++out.group_records[kGroupAll];
        for (int r = 0; r < kNumPositiveRelations; ++r) {
            bool gold = static_cast<int>(rec.gold) == r;
            bool pred = static_cast<int>(rec.predicted) == r;
            if (gold && pred) {
                ++tp[r][g];
                ++tp[r][kGroupAll];
            } else if (pred) {
                ++fp[r][g];
                ++fp[r][kGroupAll];
            } else if (gold) {
                ++fn[r][g];
                ++fn[r][kGroupAll];
            }
        }
    }
    for (int r = 0; r < kNumPositiveRelations; ++r)
        for (int g = 0; g < kNumGroups; ++g) out.prf[r][g] = detail::make_prf(tp[r][g], fp[r][g], fn[r][g]);
    return out;
}

// Mean of the pooled F1 over the four positive relations; NA is excluded.
inline double macro_f1(const RelationGenderScores& s) {
    double sum = 0.0;
    for (int r = 0; r < kNumPositiveRelations; ++r) sum += s.prf[r][kGroupAll].f1;
    return sum / kNumPositiveRelations;
}

struct GenderGaps {
    // male minus female, per positive relation
    std::array<double, kNumPositiveRelations> f1_gap{};
    std::array<double, kNumPositiveRelations> eoo_gap{};
};

inline GenderGaps gender_gaps(const RelationGenderScores& s) {
    if (s.group_records[kGroupMale] == 0 || s.group_records[kGroupFemale] == 0)
        throw DataError("gender_gaps: records must contain both genders");
    GenderGaps g;
    for (int r = 0; r < kNumPositiveRelations; ++r) {
        g.f1_gap[r] = s.prf[r][kGroupMale].f1 - s.prf[r][kGroupFemale].f1;
        g.eoo_gap[r] = s.prf[r][kGroupMale].recall - s.prf[r][kGroupFemale].recall;
    }
    return g;
}

// Mean over relations of the mean absolute pairwise inter-group F1
// difference.  f1s[r] holds one F1 per group; every relation must list the
// same number of groups.  Note: the normalization is by the number of
// unordered group pairs, not by the number of groups — for two groups this
// makes DS the plain mean absolute gap, which is what reproduces the
// published tables (the printed formula's 1/x factor would halve it).
inline double disparity_score(const std::vector<std::vector<double>>& f1s) {
    if (f1s.empty()) throw ConfigError("disparity_score: need at least one relation");
    std::size_t groups = f1s.front().size();
    if (groups < 2) throw ConfigError("disparity_score: need at least two groups");
    double total = 0.0;
    for (const auto& row : f1s) {
        if (row.size() != groups) throw ConfigError("disparity_score: ragged group lists");
        double pair_sum = 0.0;
        long pairs = 0;
        for (std::size_t a = 0; a < groups; ++a)
            for (std::size_t b = a + 1; b < groups; ++b) {
                pair_sum += std::fabs(row[a] - row[b]);
                ++pairs;
            }
        total += pair_sum / static_cast<double>(pairs);
    }
    return total / static_cast<double>(f1s.size());
}

struct MetricsReport {
    RelationGenderScores scores;
    std::array<double, kNumPositiveRelations> f1_gap{};
    std::array<double, kNumPositiveRelations> eoo_gap{};
    double macro_f1 = 0.0;
    double disparity = 0.0;
    double pps = 0.0;
    double eoo = 0.0;  // mean of the per-relation EoO gaps
    int runs = 1;
    // Standard error per flattened field name; empty until aggregation.
    std::map<std::string, double> stderrs;

    double stderr_of(const std::string& field) const {
        auto it = stderrs.find(field);
        return it == stderrs.end() ? 0.0 : it->second;
    }
};

namespace detail {

// Visits every numeric field in the canonical (stable) order used for
// flattening, aggregation, and report emission.
template <class Report, class Fn>
inline void visit_fields(Report& r, Fn&& fn) {
    for (int rel = 0; rel < kNumPositiveRelations; ++rel) {
        std::string base = relation_name(static_cast<Relation>(rel));
        for (int g = 0; g < kNumGroups; ++g) {
            std::string gb = base + "." + group_name(g) + ".";
            fn(gb + "precision", r.scores.prf[rel][g].precision);
            fn(gb + "recall", r.scores.prf[rel][g].recall);
            fn(gb + "f1", r.scores.prf[rel][g].f1);
        }
    }
    for (int rel = 0; rel < kNumPositiveRelations; ++rel)
        fn(relation_name(static_cast<Relation>(rel)) + std::string(".f1_gap"), r.f1_gap[rel]);
    for (int rel = 0; rel < kNumPositiveRelations; ++rel)
        fn(relation_name(static_cast<Relation>(rel)) + std::string(".eoo_gap"), r.eoo_gap[rel]);
    fn("macro_f1", r.macro_f1);
    fn("disparity_score", r.disparity);
    fn("pps", r.pps);
    fn("eoo", r.eoo);
}

}  // namespace detail

// Canonical name -> value view of a report, in deterministic order.
inline std::vector<std::pair<std::string, double>> flatten(const MetricsReport& r) {
    std::vector<std::pair<std::string, double>> out;
    detail::visit_fields(r, [&](const std::string& name, const double& v) { out.emplace_back(name, v); });
    return out;
}

// Names of P/R values that hit a 0/0 denominator and were reported as 0.
inline std::vector<std::string> undefined_fields(const MetricsReport& r) {
    std::vector<std::string> out;
    for (int rel = 0; rel < kNumPositiveRelations; ++rel) {
        std::string base = relation_name(static_cast<Relation>(rel));
        for (int g = 0; g < kNumGroups; ++g) {
            const PRF& p = r.scores.prf[rel][g];
            std::string gb = base + "." + group_name(g) + ".";
            if (!p.precision_defined) out.push_back(gb + "precision");
            if (!p.recall_defined) out.push_back(gb + "recall");
        }
    }
    return out;
}

// Full single-run report: scores, gaps, macro F1, DS, PPS.
inline MetricsReport performance_parity(const std::vector<PredictionRecord>& records) {
    MetricsReport rep;
    rep.scores = per_relation_scores(records);
    GenderGaps gaps = gender_gaps(rep.scores);
    rep.f1_gap = gaps.f1_gap;
    rep.eoo_gap = gaps.eoo_gap;
    rep.macro_f1 = macro_f1(rep.scores);
    std::vector<std::vector<double>> f1s(kNumPositiveRelations);
    for (int r = 0; r < kNumPositiveRelations; ++r)
        f1s[r] = {rep.scores.prf[r][kGroupMale].f1, rep.scores.prf[r][kGroupFemale].f1};
    rep.disparity = disparity_score(f1s);
    rep.pps = rep.macro_f1 - rep.disparity;
    double eoo_sum = 0.0;
    for (double e : rep.eoo_gap) eoo_sum += e;
    rep.eoo = eoo_sum / kNumPositiveRelations;
    return rep;
}

// Fleiss' kappa over an items x categories count table; every item must have
// the same number of ratings n >= 2.
inline double fleiss_kappa(const std::vector<std::vector<long>>& table) {
    if (table.size() < 2) throw DataError("fleiss_kappa: need at least two items");
    std::size_t categories = table.front().size();
    if (categories < 2) throw DataError("fleiss_kappa: need at least two categories");
    long n = 0;
    for (long c : table.front()) n += c;
    if (n < 2) throw DataError("fleiss_kappa: need at least two ratings per item");

    double p_bar = 0.0;
    std::vector<double> category_totals(categories, 0.0);
    for (const auto& row : table) {
        if (row.size() != categories) throw DataError("fleiss_kappa: ragged table");
        long row_n = 0;
        double agree = 0.0;
        for (std::size_t j = 0; j < categories; ++j) {
            if (row[j] < 0) throw DataError("fleiss_kappa: negative count");
            row_n += row[j];
            agree += static_cast<double>(row[j]) * static_cast<double>(row[j]);
            category_totals[j] += static_cast<double>(row[j]);
        }
        if (row_n != n) throw DataError("fleiss_kappa: unequal ratings per item");
        p_bar += (agree - static_cast<double>(n)) / (static_cast<double>(n) * static_cast<double>(n - 1));
    }
    p_bar /= static_cast<double>(table.size());

    double total = static_cast<double>(n) * static_cast<double>(table.size());
    double pe_bar = 0.0;
    for (double t : category_totals) {
        double p = t / total;
        pe_bar += p * p;
    }
    if (pe_bar >= 1.0)
        throw DataError("fleiss_kappa: undefined, every rating is in a single category (chance agreement 1)");
    return (p_bar - pe_bar) / (1.0 - pe_bar);
}

// Field-wise mean across runs with standard error = sample stddev / sqrt(k).
inline MetricsReport aggregate_runs(const std::vector<MetricsReport>& runs) {
    if (runs.empty()) throw ConfigError("aggregate_runs: no reports");
    const std::size_t k = runs.size();

    std::vector<std::vector<std::pair<std::string, double>>> flats;
    flats.reserve(k);
    for (const MetricsReport& r : runs) flats.push_back(flatten(r));
    for (std::size_t i = 1; i < k; ++i) {
        if (flats[i].size() != flats[0].size()) throw DataError("aggregate_runs: mismatched report shapes");
        for (std::size_t f = 0; f < flats[i].size(); ++f)
            if (flats[i][f].first != flats[0][f].first)
                throw DataError("aggregate_runs: mismatched report shapes");
    }

    MetricsReport out = runs.front();
    out.runs = static_cast<int>(k);
    out.stderrs.clear();
    // Undefined-value flags survive if any run tripped them.
    for (const MetricsReport& r : runs)
        for (int rel = 0; rel < kNumPositiveRelations; ++rel)
            for (int g = 0; g < kNumGroups; ++g) {
                out.scores.prf[rel][g].precision_defined &= r.scores.prf[rel][g].precision_defined;
                out.scores.prf[rel][g].recall_defined &= r.scores.prf[rel][g].recall_defined;
            }

    std::size_t field = 0;
    detail::visit_fields(out, [&](const std::string& name, double& value) {
        double mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) mean += flats[i][field].second;
        mean /= static_cast<double>(k);
        double se = 0.0;
        if (k > 1) {
            double ss = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                double d = flats[i][field].second - mean;
                ss += d * d;
            }
            se = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
        }
        value = mean;
        out.stderrs[name] = se;
        ++field;
    });
    return out;
}

}  // namespace fairnre::metrics
