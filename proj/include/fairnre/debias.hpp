#pragma once
// Hard-debiasing of word embeddings: a gender direction is extracted as the
// top principal component of centered definitional-pair differences, then
// neutral words are projected off that direction and re-normalized while
// gendered pairs are "equalized" to symmetric positions around it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairnre/embeddings.hpp"
#include "fairnre/types.hpp"
#include "fairnre/vocab.hpp"

namespace fairnre::embeddings {

struct GenderDirection {
    std::vector<double> g;  // unit vector; "he" (or first male anchor) projects >= 0
    bool flipped = false;   // true if the raw principal component was negated
};

namespace detail {

inline double vdot(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

inline double vdot(const std::vector<double>& a, const std::vector<double>& b) {
    return vdot(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double vnorm(const std::vector<double>& a) { return std::sqrt(vdot(a, a)); }

struct EigenResult {
    std::vector<double> values;                // descending
    std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
};

// Cyclic Jacobi eigensolver for small dense symmetric matrices.  Dimensions
// here are the embedding dim (tens to a few hundred), where this is plenty.
inline EigenResult jacobi_eigen(std::vector<std::vector<double>> a) {
    const std::size_t d = a.size();
    std::vector<std::vector<double>> v(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                if (a[p][q] == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    EigenResult r;
    r.values.reserve(d);
    r.vectors.reserve(d);
    for (std::size_t k : order) {
        r.values.push_back(a[k][k]);
        std::vector<double> col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = v[i][k];
        r.vectors.push_back(std::move(col));
    }
    return r;
}

}  // namespace detail

// Definitional pairs are (female word, male word).  The direction is the top
// principal component of the centered per-pair differences, oriented so that
// "he" (or the first male word found in the vocabulary) projects >= 0.
inline GenderDirection gender_direction(
    const EmbeddingMatrix& m,
    const std::vector<std::pair<std::string, std::string>>& definitional_pairs) {
    if (definitional_pairs.empty()) throw ConfigError("gender_direction: no definitional pairs given");
    const int d = m.dim;

    std::vector<std::vector<double>> samples;  // a-mu and b-mu for each usable pair
    std::set<std::string> missing;
    std::string orient_word;  // first male word present in vocab
    for (const auto& [fw, mw] : definitional_pairs) {
        bool have_f = m.vocab.contains(fw);
        bool have_m = m.vocab.contains(mw);
        if (have_m && orient_word.empty()) orient_word = mw;
        if (!have_f) missing.insert(fw);
        if (!have_m) missing.insert(mw);
        if (!have_f || !have_m) continue;
        const double* a = m.row(m.vocab.id_of(fw));
        const double* b = m.row(m.vocab.id_of(mw));
        std::vector<double> da(d), db(d);
        for (int i = 0; i < d; ++i) {
            double mu = 0.5 * (a[i] + b[i]);
            da[i] = a[i] - mu;
            db[i] = b[i] - mu;
        }
        samples.push_back(std::move(da));
        samples.push_back(std::move(db));
    }
    if (samples.empty()) {
        std::string msg = "gender_direction: no definitional pair fully in vocabulary; missing:";
        for (const auto& w : missing) msg += " " + w;
        throw DataError(msg);
    }

    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& s : samples)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) cov[i][j] += s[i] * s[j];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) cov[i][j] = cov[j][i];

    detail::EigenResult eig = detail::jacobi_eigen(std::move(cov));
    GenderDirection dir;
    dir.g = eig.vectors.front();
    double n = detail::vnorm(dir.g);
    if (n == 0.0) throw DataError("gender_direction: degenerate principal component");
    for (double& x : dir.g) x /= n;

    if (m.vocab.contains("he")) orient_word = "he";
    if (!orient_word.empty()) {
        double proj = detail::vdot(m.row(m.vocab.id_of(orient_word)), dir.g.data(), d);
        if (proj < 0.0) {
            for (double& x : dir.g) x = -x;
            dir.flipped = true;
        }
    }
    return dir;
}

// Neutralizes every word not in `gendered_words` (projection removed, vector
// re-normalized) and equalizes each pair in `equalize_pairs` symmetrically
// about the direction.  Equalize-pair words and the specials are implicitly
// exempt from neutralization.  Pairs with out-of-vocabulary words are skipped
// with a warning.
inline EmbeddingMatrix hard_debias(
    const EmbeddingMatrix& m, const GenderDirection& dir,
    const std::set<std::string>& gendered_words,
    const std::vector<std::pair<std::string, std::string>>& equalize_pairs,
    std::vector<std::string>* warnings = nullptr) {
    const int d = m.dim;
    if (static_cast<int>(dir.g.size()) != d)
        throw ConfigError("hard_debias: direction dimension mismatch");
    if (std::fabs(detail::vnorm(dir.g) - 1.0) > 1e-6)
        throw ConfigError("hard_debias: direction must have unit norm");
    const double* g = dir.g.data();

    std::set<std::string> exempt = gendered_words;
    exempt.insert(kUnkToken);
    exempt.insert(kPadToken);
    for (const auto& [a, b] : equalize_pairs) {
        exempt.insert(a);
        exempt.insert(b);
    }

    EmbeddingMatrix out = m;
    for (int w = 0; w < out.vocab.size(); ++w) {
        if (exempt.count(out.vocab.word(w))) continue;
        double* v = out.row(w);
        double proj = detail::vdot(v, g, d);
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i) {
            v[i] -= proj * g[i];
            norm2 += v[i] * v[i];
        }
        if (norm2 == 0.0)
            throw DataError("hard_debias: word '" + out.vocab.word(w) +
                            "' lies entirely on the gender direction; cannot normalize");
        double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < d; ++i) v[i] *= inv;
    }

    // Equalize from the original vectors, not the neutralized ones.
    for (const auto& [wa, wb] : equalize_pairs) {
        if (!m.vocab.contains(wa) || !m.vocab.contains(wb)) {
            if (warnings)
                warnings->push_back("equalize pair (" + wa + ", " + wb +
                                    ") skipped: word not in vocabulary");
            continue;
        }
        const double* a = m.row(m.vocab.id_of(wa));
        const double* b = m.row(m.vocab.id_of(wb));
        std::vector<double> nu(d);
        double nu2 = 0.0;
        for (int i = 0; i < d; ++i) {
            double mu = 0.5 * (a[i] + b[i]);
            nu[i] = mu;
        }
        double mu_proj = detail::vdot(nu.data(), g, d);
        for (int i = 0; i < d; ++i) {
            nu[i] -= mu_proj * g[i];
            nu2 += nu[i] * nu[i];
        }
        double step = std::sqrt(std::max(0.0, 1.0 - nu2));
        double sa = detail::vdot(a, g, d) >= 0.0 ? 1.0 : -1.0;
        double sb = detail::vdot(b, g, d) >= 0.0 ? 1.0 : -1.0;
        double* oa = out.row(out.vocab.id_of(wa));
        double* ob = out.row(out.vocab.id_of(wb));
        for (int i = 0; i < d; ++i) {
            oa[i] = nu[i] + sa * step * g[i];
            ob[i] = nu[i] + sb * step * g[i];
        }
    }
    return out;
}

}  // namespace fairnre::embeddings
