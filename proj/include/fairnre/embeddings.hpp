#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "fairnre/rng.hpp"
#include "fairnre/types.hpp"
#include "fairnre/vocab.hpp"

namespace fairnre::embeddings {

struct EmbeddingMatrix {
    Vocabulary vocab;
    int dim = 0;
    std::vector<double> data;  // vocab.size() x dim, row-major

    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * dim; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }
};

struct SgnsConfig {
    int dim = 50;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double initial_lr = 0.025;
    double subsample_t = 1e-4;  // 0 disables subsampling
    std::uint64_t seed = 0;
    int workers = 1;  // >1 trains hogwild-style; only workers=1 is deterministic
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative unigram^0.75 distribution over vocabulary ids; specials have
// count 0 and are never drawn.
struct UnigramSampler {
    std::vector<double> cdf;

    explicit UnigramSampler(const Vocabulary& vocab) {
        cdf.resize(static_cast<std::size_t>(vocab.size()));
        double acc = 0.0;
        for (int i = 0; i < vocab.size(); ++i) {
            acc += std::pow(static_cast<double>(vocab.count(i)), 0.75);
            cdf[static_cast<std::size_t>(i)] = acc;
        }
    }

    int draw(Rng& rng) const {
        double x = rng.uniform() * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        if (it == cdf.end()) --it;
        return static_cast<int>(it - cdf.begin());
    }
};

}  // namespace detail

// Skip-gram with negative sampling, trained with plain SGD and a linearly
// decaying learning rate. Returns the center-word vectors. Words below the
// vocabulary cut are dropped from the stream; frequent words are subsampled
// with the usual sqrt threshold rule.
inline EmbeddingMatrix train_sgns(const std::vector<Instance>& instances, const Vocabulary& vocab,
                                  const SgnsConfig& cfg) {
    if (cfg.dim <= 0) throw ConfigError("embedding dim must be > 0");
    if (cfg.window <= 0) throw ConfigError("embedding window must be > 0");
    if (cfg.negatives <= 0) throw ConfigError("embedding negatives must be > 0");
    if (cfg.epochs < 0) throw ConfigError("embedding epochs must be >= 0");
    if (cfg.workers < 1) throw ConfigError("embedding workers must be >= 1");

    const int V = vocab.size();
    const int D = cfg.dim;

    EmbeddingMatrix emb;
    emb.vocab = vocab;
    emb.dim = D;
    emb.data.resize(static_cast<std::size_t>(V) * D);
    {
        Rng init_rng(cfg.seed);
        for (double& x : emb.data) x = (init_rng.uniform() - 0.5) / D;
    }
    if (cfg.epochs == 0) return emb;

    std::vector<std::vector<int>> sentences;
    sentences.reserve(instances.size());
    long long corpus_words = 0;
    for (const Instance& inst : instances) {
        std::vector<int> ids;
        ids.reserve(inst.tokens.size());
        for (const std::string& t : inst.tokens) {
            if (!vocab.contains(t)) continue;  // OOV tokens are dropped, not mapped to <unk>
            int id = vocab.id_of(t);
            if (vocab.count(id) == 0) continue;  // specials carry no counts and are never trained
            ids.push_back(id);
            ++corpus_words;
        }
        if (!ids.empty()) sentences.push_back(std::move(ids));
    }
    if (corpus_words == 0) throw DataError("no in-vocabulary tokens to train embeddings on");

    std::vector<double> ctx(static_cast<std::size_t>(V) * D, 0.0);
    detail::UnigramSampler sampler(vocab);
    const double total_words =
        static_cast<double>(corpus_words) * static_cast<double>(cfg.epochs);
    std::atomic<long long> processed{0};

    auto train_range = [&](std::size_t begin, std::size_t end, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<int> kept;
        std::vector<double> grad_center(static_cast<std::size_t>(D));
        long long local = 0;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (std::size_t s = begin; s < end; ++s) {
                kept.clear();
                for (int id : sentences[s]) {
                    if (cfg.subsample_t > 0) {
                        double f = static_cast<double>(vocab.count(id));
                        double thresh = cfg.subsample_t * static_cast<double>(corpus_words);
                        double keep = (std::sqrt(f / thresh) + 1.0) * thresh / f;
                        if (keep < 1.0 && rng.uniform() >= keep) continue;
                    }
                    kept.push_back(id);
                }
                local += static_cast<long long>(sentences[s].size());
                if (kept.size() < 2) continue;
                for (std::size_t c = 0; c < kept.size(); ++c) {
                    long long done = processed.load(std::memory_order_relaxed) + local;
                    double lr = cfg.initial_lr *
                                std::max(1.0 - static_cast<double>(done) / (total_words + 1.0),
                                         1e-4);
                    double* center = emb.row(kept[c]);
                    for (std::size_t o = c >= static_cast<std::size_t>(cfg.window)
                                             ? c - static_cast<std::size_t>(cfg.window)
                                             : 0;
                         o < kept.size() && o <= c + static_cast<std::size_t>(cfg.window); ++o) {
                        if (o == c) continue;
                        int ctx_id = kept[o];
                        std::fill(grad_center.begin(), grad_center.end(), 0.0);
                        for (int k = 0; k <= cfg.negatives; ++k) {
                            int target;
                            double label;
                            if (k == 0) {
                                target = ctx_id;
                                label = 1.0;
                            } else {
                                target = sampler.draw(rng);
                                if (target == ctx_id) continue;
                                label = 0.0;
                            }
                            double* u = ctx.data() + static_cast<std::size_t>(target) * D;
                            double dot = 0.0;
                            for (int d = 0; d < D; ++d) dot += u[d] * center[d];
                            double g = (label - detail::sigmoid(dot)) * lr;
                            for (int d = 0; d < D; ++d) {
                                grad_center[static_cast<std::size_t>(d)] += g * u[d];
                                u[d] += g * center[d];
                            }
                        }
                        for (int d = 0; d < D; ++d) center[d] += grad_center[static_cast<std::size_t>(d)];
                    }
                }
            }
            processed.fetch_add(local, std::memory_order_relaxed);
            local = 0;
        }
    };

    if (cfg.workers == 1) {
        train_range(0, sentences.size(), cfg.seed + 0x5DEECE66DULL);
    } else {
        std::vector<std::thread> threads;
        std::size_t per = (sentences.size() + cfg.workers - 1) / static_cast<std::size_t>(cfg.workers);
        for (int w = 0; w < cfg.workers; ++w) {
            std::size_t b = static_cast<std::size_t>(w) * per;
            std::size_t e = std::min(sentences.size(), b + per);
            if (b >= e) break;
            threads.emplace_back(train_range, b, e,
                                 cfg.seed + 0x5DEECE66DULL + static_cast<std::uint64_t>(w) * 0x9E37ULL);
        }
        for (auto& t : threads) t.join();
    }
    return emb;
}

// Text format: first line "|V| dim", then one line per word with dim floats.
inline void save_embeddings_text(const std::string& path, const EmbeddingMatrix& emb) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embeddings file: " + path);
    out << emb.vocab.size() << ' ' << emb.dim << '\n';
    char buf[40];
    for (int i = 0; i < emb.vocab.size(); ++i) {
        out << emb.vocab.word(i);
        const double* r = emb.row(i);
        for (int d = 0; d < emb.dim; ++d) {
            std::snprintf(buf, sizeof(buf), " %.17g", r[d]);
            out << buf;
        }
        out << '\n';
    }
}

// Accepts any word2vec-style text file; UNK/PAD rows are prepended as zero
// vectors when the file does not carry them.
inline EmbeddingMatrix load_embeddings_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embeddings file: " + path);
    long long v = 0;
    int dim = 0;
    if (!(in >> v >> dim) || v <= 0 || dim <= 0)
        throw DataError(path + ": bad embeddings header (expected '<vocab> <dim>')");

    std::vector<std::string> words;
    std::vector<std::vector<double>> rows;
    words.reserve(static_cast<std::size_t>(v));
    for (long long i = 0; i < v; ++i) {
        std::string w;
        if (!(in >> w)) throw DataError(path + ": truncated embeddings file");
        std::vector<double> r(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d)
            if (!(in >> r[static_cast<std::size_t>(d)]))
                throw DataError(path + ": truncated row for word '" + w + "'");
        words.push_back(std::move(w));
        rows.push_back(std::move(r));
    }

    bool has_specials = words.size() >= 2 && words[0] == kUnkToken && words[1] == kPadToken;
    EmbeddingMatrix emb;
    emb.dim = dim;
    if (has_specials) {
        std::vector<std::string> plain(words.begin() + 2, words.end());
        emb.vocab = Vocabulary(std::move(plain), {});
        emb.data.reserve(words.size() * static_cast<std::size_t>(dim));
        for (const auto& r : rows) emb.data.insert(emb.data.end(), r.begin(), r.end());
    } else {
        emb.vocab = Vocabulary(std::move(words), {});
        emb.data.assign(static_cast<std::size_t>(2) * dim, 0.0);
        for (const auto& r : rows) emb.data.insert(emb.data.end(), r.begin(), r.end());
    }
    if (static_cast<long long>(emb.vocab.size()) * dim != static_cast<long long>(emb.data.size()))
        throw DataError(path + ": inconsistent embeddings shape");
    return emb;
}

}  // namespace fairnre::embeddings
