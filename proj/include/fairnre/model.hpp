#pragma once
// Bag-level neural relation extraction with manual gradients: CNN/PCNN
// sentence encoders over word + position embeddings, selective-attention or
// average bag selectors, a 5-way softmax classifier, and a plain-SGD trainer
// with dev-set early stopping.  All backward passes are hand-derived and are
// validated against central finite differences in the test suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairnre/embeddings.hpp"
#include "fairnre/metrics.hpp"
#include "fairnre/rng.hpp"
#include "fairnre/types.hpp"
#include "fairnre/vocab.hpp"

namespace fairnre::model {

enum class Encoder { cnn = 0, pcnn = 1 };
enum class Selector { att = 0, ave = 1 };

inline const char* encoder_name(Encoder e) { return e == Encoder::cnn ? "cnn" : "pcnn"; }
inline const char* selector_name(Selector s) { return s == Selector::att ? "att" : "ave"; }

inline Encoder parse_encoder(const std::string& s) {
    if (s == "cnn") return Encoder::cnn;
    if (s == "pcnn") return Encoder::pcnn;
    throw ConfigError("unknown encoder '" + s + "' (expected cnn or pcnn)");
}

inline Selector parse_selector(const std::string& s) {
    if (s == "att") return Selector::att;
    if (s == "ave") return Selector::ave;
    throw ConfigError("unknown selector '" + s + "' (expected att or ave)");
}

struct ModelConfig {
    Encoder encoder = Encoder::pcnn;
    Selector selector = Selector::att;
    int word_dim = 50;
    int pos_dim = 5;
    int max_len = 120;
    int max_rel_pos = 100;
    int n_filters = 230;
    int conv_window = 3;
    double dropout_p = 0.5;
    double lr = 0.5;
    int batch_size = 160;
    int max_epochs = 60;
    int patience = 10;
    std::uint64_t seed = 0;
    bool per_sentence = false;       // treat every instance as a singleton bag
    bool freeze_embeddings = false;  // do not fine-tune the word table
};

inline void validate(const ModelConfig& c) {
    if (c.word_dim <= 0 || c.pos_dim <= 0 || c.n_filters <= 0)
        throw ConfigError("model dimensions must be positive");
    if (c.conv_window < 1 || c.conv_window % 2 == 0)
        throw ConfigError("conv_window must be odd and >= 1");
    if (c.max_len < c.conv_window) throw ConfigError("max_len must be >= conv_window");
    if (c.max_rel_pos < 1) throw ConfigError("max_rel_pos must be >= 1");
    if (!(c.dropout_p >= 0.0 && c.dropout_p < 1.0)) throw ConfigError("dropout_p must lie in [0,1)");
    if (c.lr <= 0.0) throw ConfigError("lr must be positive");
    if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (c.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (c.patience < 0) throw ConfigError("patience must be >= 0");
}

inline int input_dim(const ModelConfig& c) { return c.word_dim + 2 * c.pos_dim; }
inline int rep_dim(const ModelConfig& c) {
    return c.encoder == Encoder::pcnn ? 3 * c.n_filters : c.n_filters;
}
inline int pos_rows(const ModelConfig& c) { return 2 * c.max_rel_pos + 1; }

struct Features {
    std::vector<int> tokens;    // length max_len, PAD-filled past len
    std::vector<int> pos_head;  // position-table indices, length max_len
    std::vector<int> pos_tail;
    int p1 = 0;  // sorted anchors, clipped to the truncated length
    int p2 = 0;
    int len = 0;  // true (possibly truncated) sentence length
};

inline Features featurize(const Instance& inst, const embeddings::Vocabulary& vocab,
                          const ModelConfig& cfg) {
    if (inst.tokens.empty())
        throw DataError("featurize: instance '" + inst.instance_id + "' has no tokens");
    Features f;
    f.len = std::min(static_cast<int>(inst.tokens.size()), cfg.max_len);
    f.tokens.assign(cfg.max_len, embeddings::Vocabulary::kPadId);
    f.pos_head.assign(cfg.max_len, cfg.max_rel_pos);
    f.pos_tail.assign(cfg.max_len, cfg.max_rel_pos);
    for (int i = 0; i < f.len; ++i) {
        f.tokens[i] = vocab.id_of(inst.tokens[i]);
        int rh = std::clamp(i - inst.head_anchor, -cfg.max_rel_pos, cfg.max_rel_pos);
        int rt = std::clamp(i - inst.tail_anchor, -cfg.max_rel_pos, cfg.max_rel_pos);
        f.pos_head[i] = rh + cfg.max_rel_pos;
        f.pos_tail[i] = rt + cfg.max_rel_pos;
    }
    f.p1 = std::clamp(std::min(inst.head_anchor, inst.tail_anchor), 0, f.len - 1);
    f.p2 = std::clamp(std::max(inst.head_anchor, inst.tail_anchor), 0, f.len - 1);
    return f;
}

struct Bag {
    std::string id;
    std::string head_id;
    std::string tail_surface;
    Gender gender = Gender::male;
    Relation gold = Relation::na;
    std::vector<Features> sentences;
};

// Groups instances into bags keyed on (head_id, tail_surface), in first-
// appearance order.  If distant supervision attached different relations to
// the same pair, the bag's gold label is the majority vote (ties to the
// lowest relation index).  With per_sentence set, every instance becomes its
// own singleton bag keyed by instance id.
inline std::vector<Bag> build_bags(const std::vector<Instance>& instances,
                                   const embeddings::Vocabulary& vocab, const ModelConfig& cfg) {
    std::vector<Bag> bags;
    if (cfg.per_sentence) {
        bags.reserve(instances.size());
        for (const Instance& inst : instances) {
            Bag b;
            b.id = inst.instance_id;
            b.head_id = inst.head_id;
            b.tail_surface = inst.tail_surface;
            b.gender = inst.gender;
            b.gold = inst.relation;
            b.sentences.push_back(featurize(inst, vocab, cfg));
            bags.push_back(std::move(b));
        }
        return bags;
    }

    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::array<int, kNumRelations>> votes;
    for (const Instance& inst : instances) {
        std::string key = inst.head_id + "|" + inst.tail_surface;
        auto [it, fresh] = index.emplace(key, bags.size());
        if (fresh) {
            Bag b;
            b.id = key;
            b.head_id = inst.head_id;
            b.tail_surface = inst.tail_surface;
            b.gender = inst.gender;
            bags.push_back(std::move(b));
            votes.push_back({});
        }
        bags[it->second].sentences.push_back(featurize(inst, vocab, cfg));
        ++votes[it->second][static_cast<int>(inst.relation)];
    }
    for (std::size_t i = 0; i < bags.size(); ++i) {
        int best = 0;
        for (int r = 1; r < kNumRelations; ++r)
            if (votes[i][r] > votes[i][best]) best = r;
        bags[i].gold = static_cast<Relation>(best);
    }
    return bags;
}

struct Parameters {
    ModelConfig config;
    embeddings::Vocabulary vocab;
    std::vector<double> word_emb;      // V x word_dim
    std::vector<double> pos_head_emb;  // pos_rows x pos_dim
    std::vector<double> pos_tail_emb;  // pos_rows x pos_dim
    std::vector<double> conv_w;        // n_filters x (conv_window * input_dim)
    std::vector<double> conv_b;        // n_filters
    std::vector<double> att_A;         // rep_dim x rep_dim bilinear form
    std::vector<double> att_q;         // kNumRelations x rep_dim relation queries
    std::vector<double> cls_w;         // kNumRelations x rep_dim
    std::vector<double> cls_b;         // kNumRelations
};

inline Parameters init_parameters(const embeddings::EmbeddingMatrix& emb, const ModelConfig& cfg,
                                  Rng& rng) {
    validate(cfg);
    if (emb.dim != cfg.word_dim)
        throw ConfigError("embedding dim " + std::to_string(emb.dim) + " != model word_dim " +
                          std::to_string(cfg.word_dim));
    Parameters P;
    P.config = cfg;
    P.vocab = emb.vocab;
    P.word_emb = emb.data;

    const int in = input_dim(cfg), F = cfg.n_filters, w = cfg.conv_window, R = rep_dim(cfg);
    auto uniform_fill = [&](std::vector<double>& v, std::size_t count, double limit) {
        v.resize(count);
        for (double& x : v) x = (rng.uniform() * 2.0 - 1.0) * limit;
    };
    auto xavier = [&](std::vector<double>& v, std::size_t count, double fan_in, double fan_out) {
        uniform_fill(v, count, std::sqrt(6.0 / (fan_in + fan_out)));
    };

    uniform_fill(P.pos_head_emb, static_cast<std::size_t>(pos_rows(cfg)) * cfg.pos_dim, 0.1);
    uniform_fill(P.pos_tail_emb, static_cast<std::size_t>(pos_rows(cfg)) * cfg.pos_dim, 0.1);
    xavier(P.conv_w, static_cast<std::size_t>(F) * w * in, static_cast<double>(w) * in, F);
    P.conv_b.assign(F, 0.0);
    P.att_A.assign(static_cast<std::size_t>(R) * R, 0.0);
    for (int i = 0; i < R; ++i) P.att_A[static_cast<std::size_t>(i) * R + i] = 1.0;
    xavier(P.att_q, static_cast<std::size_t>(kNumRelations) * R, R, R);
    xavier(P.cls_w, static_cast<std::size_t>(kNumRelations) * R, R, kNumRelations);
    P.cls_b.assign(kNumRelations, 0.0);
    return P;
}

inline Parameters init_parameters(const embeddings::EmbeddingMatrix& emb, const ModelConfig& cfg) {
    Rng rng(cfg.seed);
    return init_parameters(emb, cfg, rng);
}

// Parameter gradients; the word table uses touched-row tracking so batch
// resets stay cheap with large vocabularies.
struct Gradients {
    std::vector<double> word_emb, pos_head_emb, pos_tail_emb;
    std::vector<double> conv_w, conv_b, att_A, att_q, cls_w, cls_b;
    std::vector<int> touched_words;
    std::vector<char> word_dirty;
    int word_dim = 0;

    void init(const Parameters& P) {
        word_emb.assign(P.word_emb.size(), 0.0);
        pos_head_emb.assign(P.pos_head_emb.size(), 0.0);
        pos_tail_emb.assign(P.pos_tail_emb.size(), 0.0);
        conv_w.assign(P.conv_w.size(), 0.0);
        conv_b.assign(P.conv_b.size(), 0.0);
        att_A.assign(P.att_A.size(), 0.0);
        att_q.assign(P.att_q.size(), 0.0);
        cls_w.assign(P.cls_w.size(), 0.0);
        cls_b.assign(P.cls_b.size(), 0.0);
        word_dirty.assign(P.vocab.size(), 0);
        touched_words.clear();
        word_dim = P.config.word_dim;
    }

    void touch_word(int id) {
        if (!word_dirty[static_cast<std::size_t>(id)]) {
            word_dirty[static_cast<std::size_t>(id)] = 1;
            touched_words.push_back(id);
        }
    }

    void zero() {
        for (int id : touched_words) {
            double* row = word_emb.data() + static_cast<std::size_t>(id) * word_dim;
            std::fill(row, row + word_dim, 0.0);
            word_dirty[static_cast<std::size_t>(id)] = 0;
        }
        touched_words.clear();
        std::fill(pos_head_emb.begin(), pos_head_emb.end(), 0.0);
        std::fill(pos_tail_emb.begin(), pos_tail_emb.end(), 0.0);
        std::fill(conv_w.begin(), conv_w.end(), 0.0);
        std::fill(conv_b.begin(), conv_b.end(), 0.0);
        std::fill(att_A.begin(), att_A.end(), 0.0);
        std::fill(att_q.begin(), att_q.end(), 0.0);
        std::fill(cls_w.begin(), cls_w.end(), 0.0);
        std::fill(cls_b.begin(), cls_b.end(), 0.0);
    }
};

namespace detail {

inline void softmax_inplace(std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

struct SentCache {
    std::vector<double> x;     // len x input_dim token inputs
    std::vector<double> conv;  // len x n_filters pre-pool activations
    std::vector<double> z;     // rep_dim sentence vector (post-tanh)
    std::vector<int> arg;      // rep_dim argmax positions; -1 for empty segment
};

inline void encode_sentence(const Features& ft, const Parameters& P, const ModelConfig& cfg,
                            SentCache& c) {
    const int len = ft.len, in = input_dim(cfg), F = cfg.n_filters;
    const int w = cfg.conv_window, half = w / 2, R = rep_dim(cfg);

    c.x.assign(static_cast<std::size_t>(len) * in, 0.0);
    for (int j = 0; j < len; ++j) {
        double* xj = c.x.data() + static_cast<std::size_t>(j) * in;
        const double* we = P.word_emb.data() + static_cast<std::size_t>(ft.tokens[j]) * cfg.word_dim;
        std::copy(we, we + cfg.word_dim, xj);
        const double* ph =
            P.pos_head_emb.data() + static_cast<std::size_t>(ft.pos_head[j]) * cfg.pos_dim;
        std::copy(ph, ph + cfg.pos_dim, xj + cfg.word_dim);
        const double* pt =
            P.pos_tail_emb.data() + static_cast<std::size_t>(ft.pos_tail[j]) * cfg.pos_dim;
        std::copy(pt, pt + cfg.pos_dim, xj + cfg.word_dim + cfg.pos_dim);
    }

    // Positions outside [0, len) contribute zero input (zero padding).
    c.conv.assign(static_cast<std::size_t>(len) * F, 0.0);
    for (int f = 0; f < F; ++f) {
        const double* Wf = P.conv_w.data() + static_cast<std::size_t>(f) * w * in;
        for (int j = 0; j < len; ++j) {
            double acc = P.conv_b[f];
            for (int k = 0; k < w; ++k) {
                int jj = j + k - half;
                if (jj < 0 || jj >= len) continue;
                const double* xk = c.x.data() + static_cast<std::size_t>(jj) * in;
                const double* wk = Wf + static_cast<std::size_t>(k) * in;
                double dot = 0.0;
                for (int d = 0; d < in; ++d) dot += wk[d] * xk[d];
                acc += dot;
            }
            c.conv[static_cast<std::size_t>(j) * F + f] = acc;
        }
    }

    c.z.assign(R, 0.0);
    c.arg.assign(R, -1);
    auto pool = [&](int segment, int from, int to) {  // inclusive; empty pools to 0 pre-tanh
        for (int f = 0; f < F; ++f) {
            int u = segment * F + f;
            if (from > to) continue;
            double best = -std::numeric_limits<double>::infinity();
            int where = -1;
            for (int j = from; j <= to; ++j) {
                double v = c.conv[static_cast<std::size_t>(j) * F + f];
                if (v > best) {
                    best = v;
                    where = j;
                }
            }
            c.z[u] = best;
            c.arg[u] = where;
        }
    };
    if (cfg.encoder == Encoder::cnn) {
        pool(0, 0, len - 1);
    } else {
        pool(0, 0, ft.p1);
        pool(1, ft.p1 + 1, ft.p2);
        pool(2, ft.p2 + 1, len - 1);
    }
    for (int u = 0; u < R; ++u) c.z[u] = std::tanh(c.z[u]);
}

inline void encode_backward(const Features& ft, const Parameters& P, const ModelConfig& cfg,
                            const SentCache& c, const std::vector<double>& dz, Gradients& G) {
    const int len = ft.len, in = input_dim(cfg), F = cfg.n_filters;
    const int w = cfg.conv_window, half = w / 2, R = rep_dim(cfg);

    std::vector<double> dx(static_cast<std::size_t>(len) * in, 0.0);
    for (int u = 0; u < R; ++u) {
        int j = c.arg[u];
        if (j < 0) continue;
        double g = dz[u] * (1.0 - c.z[u] * c.z[u]);
        if (g == 0.0) continue;
        int f = cfg.encoder == Encoder::cnn ? u : u % F;
        G.conv_b[f] += g;
        double* dWf = G.conv_w.data() + static_cast<std::size_t>(f) * w * in;
        const double* Wf = P.conv_w.data() + static_cast<std::size_t>(f) * w * in;
        for (int k = 0; k < w; ++k) {
            int jj = j + k - half;
            if (jj < 0 || jj >= len) continue;
            const double* xk = c.x.data() + static_cast<std::size_t>(jj) * in;
            double* dxk = dx.data() + static_cast<std::size_t>(jj) * in;
            double* dwk = dWf + static_cast<std::size_t>(k) * in;
            const double* wk = Wf + static_cast<std::size_t>(k) * in;
            for (int d = 0; d < in; ++d) {
                dwk[d] += g * xk[d];
                dxk[d] += g * wk[d];
            }
        }
    }

    for (int j = 0; j < len; ++j) {
        const double* dxj = dx.data() + static_cast<std::size_t>(j) * in;
        G.touch_word(ft.tokens[j]);
        double* gw = G.word_emb.data() + static_cast<std::size_t>(ft.tokens[j]) * cfg.word_dim;
        for (int d = 0; d < cfg.word_dim; ++d) gw[d] += dxj[d];
        double* gh = G.pos_head_emb.data() + static_cast<std::size_t>(ft.pos_head[j]) * cfg.pos_dim;
        for (int d = 0; d < cfg.pos_dim; ++d) gh[d] += dxj[cfg.word_dim + d];
        double* gt = G.pos_tail_emb.data() + static_cast<std::size_t>(ft.pos_tail[j]) * cfg.pos_dim;
        for (int d = 0; d < cfg.pos_dim; ++d) gt[d] += dxj[cfg.word_dim + cfg.pos_dim + d];
    }
}

// Shape-affecting fields must match the parameters a model was built with.
inline void check_compat(const Parameters& P, const ModelConfig& cfg) {
    const ModelConfig& pc = P.config;
    if (pc.encoder != cfg.encoder || pc.word_dim != cfg.word_dim || pc.pos_dim != cfg.pos_dim ||
        pc.max_rel_pos != cfg.max_rel_pos || pc.n_filters != cfg.n_filters ||
        pc.conv_window != cfg.conv_window)
        throw ConfigError("model config is incompatible with the trained parameter shapes");
}

}  // namespace detail

// Sentence encoding as a standalone operation (used directly by tests).
inline std::vector<double> encode(const Features& ft, const Parameters& P, const ModelConfig& cfg) {
    detail::SentCache c;
    detail::encode_sentence(ft, P, cfg, c);
    return c.z;
}

// Combines per-sentence vectors into one bag vector.  For att the scores are
// e_i = z_i' A q_r with the given query relation (training uses the gold
// relation); for ave the mean is taken and the query is ignored.
inline std::vector<double> bag_representation(const std::vector<std::vector<double>>& zs,
                                              Selector selector, Relation query,
                                              const Parameters& P, const ModelConfig& cfg) {
    if (zs.empty()) throw DataError("bag_representation: empty bag");
    const int R = rep_dim(cfg);
    const std::size_t n = zs.size();
    std::vector<double> s(R, 0.0);
    if (selector == Selector::ave) {
        for (const auto& z : zs)
            for (int r = 0; r < R; ++r) s[r] += z[r];
        for (int r = 0; r < R; ++r) s[r] /= static_cast<double>(n);
        return s;
    }
    std::vector<double> u(R, 0.0);  // A q_r
    const double* q = P.att_q.data() + static_cast<std::size_t>(static_cast<int>(query)) * R;
    for (int a = 0; a < R; ++a) {
        const double* Arow = P.att_A.data() + static_cast<std::size_t>(a) * R;
        double acc = 0.0;
        for (int b = 0; b < R; ++b) acc += Arow[b] * q[b];
        u[a] = acc;
    }
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int r = 0; r < R; ++r) acc += zs[i][r] * u[r];
        e[i] = acc;
    }
    detail::softmax_inplace(e);
    for (std::size_t i = 0; i < n; ++i)
        for (int r = 0; r < R; ++r) s[r] += e[i] * zs[i][r];
    return s;
}

// Inference-mode probabilities.  ave uses the single mean representation;
// att computes one representation per candidate relation and scores each
// relation on its own representation (the diagonal construction).
inline std::vector<double> forward(const Bag& bag, const Parameters& P, const ModelConfig& cfg) {
    if (bag.sentences.empty()) throw DataError("forward: empty bag");
    const int R = rep_dim(cfg);
    std::vector<std::vector<double>> zs;
    zs.reserve(bag.sentences.size());
    detail::SentCache c;
    for (const Features& ft : bag.sentences) {
        detail::encode_sentence(ft, P, cfg, c);
        zs.push_back(c.z);
    }
    std::vector<double> logits(kNumRelations, 0.0);
    if (cfg.selector == Selector::ave) {
        std::vector<double> s = bag_representation(zs, Selector::ave, Relation::na, P, cfg);
        for (int r = 0; r < kNumRelations; ++r) {
            const double* wr = P.cls_w.data() + static_cast<std::size_t>(r) * R;
            double acc = P.cls_b[r];
            for (int d = 0; d < R; ++d) acc += wr[d] * s[d];
            logits[r] = acc;
        }
    } else {
        for (int r = 0; r < kNumRelations; ++r) {
            std::vector<double> s =
                bag_representation(zs, Selector::att, static_cast<Relation>(r), P, cfg);
            const double* wr = P.cls_w.data() + static_cast<std::size_t>(r) * R;
            double acc = P.cls_b[r];
            for (int d = 0; d < R; ++d) acc += wr[d] * s[d];
            logits[r] = acc;
        }
    }
    detail::softmax_inplace(logits);
    return logits;
}

// Training-mode negative log-likelihood of the bag's gold relation.  The
// attention query is the gold relation's; `dropout_mask` (entries 0 or
// 1/(1-p)) is applied to the bag representation when given.  When `G` is
// non-null the hand-derived gradients of the loss are accumulated into it.
inline double bag_training_loss(const Bag& bag, const Parameters& P, const ModelConfig& cfg,
                                const std::vector<double>* dropout_mask, Gradients* G) {
    if (bag.sentences.empty()) throw DataError("bag_training_loss: empty bag");
    const int R = rep_dim(cfg);
    const int C = kNumRelations;
    const int gold = static_cast<int>(bag.gold);
    const std::size_t n = bag.sentences.size();

    std::vector<detail::SentCache> caches(n);
    for (std::size_t i = 0; i < n; ++i)
        detail::encode_sentence(bag.sentences[i], P, cfg, caches[i]);

    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    std::vector<double> u;  // A q_gold, att only
    if (cfg.selector == Selector::att) {
        u.assign(R, 0.0);
        const double* q = P.att_q.data() + static_cast<std::size_t>(gold) * R;
        for (int a = 0; a < R; ++a) {
            const double* Arow = P.att_A.data() + static_cast<std::size_t>(a) * R;
            double acc = 0.0;
            for (int b = 0; b < R; ++b) acc += Arow[b] * q[b];
            u[a] = acc;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int r = 0; r < R; ++r) acc += caches[i].z[r] * u[r];
            alpha[i] = acc;
        }
        detail::softmax_inplace(alpha);
    }

    std::vector<double> s(R, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int r = 0; r < R; ++r) s[r] += alpha[i] * caches[i].z[r];

    std::vector<double> sd = s;
    if (dropout_mask)
        for (int r = 0; r < R; ++r) sd[r] *= (*dropout_mask)[r];

    std::vector<double> p(C, 0.0);
    for (int cl = 0; cl < C; ++cl) {
        const double* wr = P.cls_w.data() + static_cast<std::size_t>(cl) * R;
        double acc = P.cls_b[cl];
        for (int d = 0; d < R; ++d) acc += wr[d] * sd[d];
        p[cl] = acc;
    }
    detail::softmax_inplace(p);
    double loss = -std::log(std::max(p[gold], 1e-300));
    if (!G) return loss;

    // dL/dlogit = p - onehot(gold)
    std::vector<double> dl = p;
    dl[gold] -= 1.0;
    std::vector<double> dsd(R, 0.0);
    for (int cl = 0; cl < C; ++cl) {
        G->cls_b[cl] += dl[cl];
        double* gw = G->cls_w.data() + static_cast<std::size_t>(cl) * R;
        const double* wr = P.cls_w.data() + static_cast<std::size_t>(cl) * R;
        for (int d = 0; d < R; ++d) {
            gw[d] += dl[cl] * sd[d];
            dsd[d] += dl[cl] * wr[d];
        }
    }
    std::vector<double> ds = dsd;
    if (dropout_mask)
        for (int r = 0; r < R; ++r) ds[r] *= (*dropout_mask)[r];

    std::vector<std::vector<double>> dz(n, std::vector<double>(R, 0.0));
    if (cfg.selector == Selector::ave) {
        for (std::size_t i = 0; i < n; ++i)
            for (int r = 0; r < R; ++r) dz[i][r] = ds[r] / static_cast<double>(n);
    } else {
        std::vector<double> dalpha(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int r = 0; r < R; ++r) {
                acc += ds[r] * caches[i].z[r];
                dz[i][r] += alpha[i] * ds[r];
            }
            dalpha[i] = acc;
        }
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) wsum += alpha[i] * dalpha[i];
        std::vector<double> de(n);
        for (std::size_t i = 0; i < n; ++i) de[i] = alpha[i] * (dalpha[i] - wsum);

        std::vector<double> du(R, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int r = 0; r < R; ++r) {
                du[r] += de[i] * caches[i].z[r];
                dz[i][r] += de[i] * u[r];
            }
        }
        const double* q = P.att_q.data() + static_cast<std::size_t>(gold) * R;
        double* gq = G->att_q.data() + static_cast<std::size_t>(gold) * R;
        for (int a = 0; a < R; ++a) {
            double* gA = G->att_A.data() + static_cast<std::size_t>(a) * R;
            const double* Arow = P.att_A.data() + static_cast<std::size_t>(a) * R;
            for (int b = 0; b < R; ++b) {
                gA[b] += du[a] * q[b];
                gq[b] += Arow[b] * du[a];
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        detail::encode_backward(bag.sentences[i], P, cfg, caches[i], dz[i], *G);
    return loss;
}

inline void apply_sgd(Parameters& P, const Gradients& G, double scale, bool freeze_embeddings) {
    auto upd = [scale](std::vector<double>& p, const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= scale * g[i];
    };
    if (!freeze_embeddings) {
        const int d = P.config.word_dim;
        for (int id : G.touched_words) {
            double* pr = P.word_emb.data() + static_cast<std::size_t>(id) * d;
            const double* gr = G.word_emb.data() + static_cast<std::size_t>(id) * d;
            for (int k = 0; k < d; ++k) pr[k] -= scale * gr[k];
        }
    }
    upd(P.pos_head_emb, G.pos_head_emb);
    upd(P.pos_tail_emb, G.pos_tail_emb);
    upd(P.conv_w, G.conv_w);
    upd(P.conv_b, G.conv_b);
    upd(P.att_A, G.att_A);
    upd(P.att_q, G.att_q);
    upd(P.cls_w, G.cls_w);
    upd(P.cls_b, G.cls_b);
}

inline std::vector<PredictionRecord> predict(const Parameters& P, const std::vector<Bag>& bags,
                                             const ModelConfig& cfg) {
    detail::check_compat(P, cfg);
    std::vector<PredictionRecord> records;
    records.reserve(bags.size());
    for (const Bag& bag : bags) {
        std::vector<double> probs = forward(bag, P, cfg);
        int best = 0;  // ties break to the lowest relation index
        for (int r = 1; r < kNumRelations; ++r)
            if (probs[r] > probs[best]) best = r;
        records.push_back({bag.id, bag.gender, bag.gold, static_cast<Relation>(best)});
    }
    return records;
}

inline std::vector<PredictionRecord> predict(const Parameters& P, const DatasetSplit& split,
                                             const ModelConfig& cfg) {
    return predict(P, build_bags(split.instances, P.vocab, cfg), cfg);
}

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;  // mean bag NLL over the epoch
    double dev_f1 = 0.0;      // macro F1 on dev (0 when dev is empty)
};

struct TrainResult {
    Parameters params;  // best-dev snapshot
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_dev_f1 = 0.0;
};

// Mini-batch SGD over bags with dev-set early stopping: training stops when
// `patience` consecutive epochs fail to improve dev macro F1 (or at
// max_epochs) and the best-dev parameters are returned.  With an empty dev
// split, every epoch counts as an improvement (no early stopping).
inline TrainResult train_model(const DatasetSplit& train, const DatasetSplit& dev,
                               const embeddings::EmbeddingMatrix& emb, const ModelConfig& cfg) {
    validate(cfg);
    if (train.instances.empty()) throw DataError("train_model: empty training split");

    Rng rng(cfg.seed);
    Parameters P = init_parameters(emb, cfg, rng);
    std::vector<Bag> train_bags = build_bags(train.instances, P.vocab, cfg);
    std::vector<Bag> dev_bags = build_bags(dev.instances, P.vocab, cfg);

    Gradients G;
    G.init(P);
    std::vector<std::size_t> order(train_bags.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.params = P;
    const int R = rep_dim(cfg);
    const double keep = 1.0 - cfg.dropout_p;
    std::vector<double> mask(R);
    double best = -1.0;
    int since_best = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            G.zero();
            for (std::size_t bi = start; bi < end; ++bi) {
                const std::vector<double>* mptr = nullptr;
                if (cfg.dropout_p > 0.0) {
                    for (int r = 0; r < R; ++r)
                        mask[r] = rng.uniform() < keep ? 1.0 / keep : 0.0;
                    mptr = &mask;
                }
                loss_sum += bag_training_loss(train_bags[order[bi]], P, cfg, mptr, &G);
            }
            apply_sgd(P, G, cfg.lr / static_cast<double>(end - start), cfg.freeze_embeddings);
        }

        double dev_f1 = 0.0;
        if (!dev_bags.empty()) {
            std::vector<PredictionRecord> recs = predict(P, dev_bags, cfg);
            dev_f1 = metrics::macro_f1(metrics::per_relation_scores(recs));
        }
        result.log.push_back({epoch, loss_sum / static_cast<double>(train_bags.size()), dev_f1});

        bool improved = dev_bags.empty() || dev_f1 > best;
        if (improved) {
            best = dev_f1;
            result.params = P;
            result.best_epoch = epoch;
            result.best_dev_f1 = dev_f1;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint format (text, versioned):
//   fairnre-model v1
//   <config key> <value>        (one per line, fixed order)
//   vocab <N>                   (N non-special words follow)
//   <word> <count>
//   tensor <name> <rows> <cols>
//   <rows lines of cols %.17g values>
// ---------------------------------------------------------------------------

namespace detail {

inline void write_tensor(std::ofstream& out, const char* name, const std::vector<double>& t,
                         std::size_t rows, std::size_t cols) {
    out << "tensor " << name << " " << rows << " " << cols << "\n";
    char buf[64];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", t[r * cols + c]);
            out << (c ? " " : "") << buf;
        }
        out << "\n";
    }
}

inline std::vector<double> read_tensor(std::istream& in, const std::string& name,
                                       std::size_t rows, std::size_t cols) {
    std::string tag, got;
    std::size_t r = 0, c = 0;
    if (!(in >> tag >> got >> r >> c) || tag != "tensor" || got != name || r != rows || c != cols)
        throw DataError("checkpoint: bad tensor header for '" + name + "'");
    std::vector<double> t(rows * cols);
    for (double& x : t)
        if (!(in >> x)) throw DataError("checkpoint: truncated tensor '" + name + "'");
    return t;
}

}  // namespace detail

inline void save_checkpoint(const Parameters& P, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    const ModelConfig& c = P.config;
    out << "fairnre-model v1\n";
    out << "encoder " << encoder_name(c.encoder) << "\n";
    out << "selector " << selector_name(c.selector) << "\n";
    out << "word_dim " << c.word_dim << "\n";
    out << "pos_dim " << c.pos_dim << "\n";
    out << "max_len " << c.max_len << "\n";
    out << "max_rel_pos " << c.max_rel_pos << "\n";
    out << "n_filters " << c.n_filters << "\n";
    out << "conv_window " << c.conv_window << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", c.dropout_p);
    out << "dropout_p " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", c.lr);
    out << "lr " << buf << "\n";
    out << "batch_size " << c.batch_size << "\n";
    out << "max_epochs " << c.max_epochs << "\n";
    out << "patience " << c.patience << "\n";
    out << "seed " << c.seed << "\n";
    out << "per_sentence " << (c.per_sentence ? 1 : 0) << "\n";
    out << "freeze_embeddings " << (c.freeze_embeddings ? 1 : 0) << "\n";

    const int V = P.vocab.size();
    out << "vocab " << (V - 2) << "\n";
    for (int i = 2; i < V; ++i) out << P.vocab.word(i) << " " << P.vocab.count(i) << "\n";

    const int in = input_dim(c), R = rep_dim(c);
    detail::write_tensor(out, "word_emb", P.word_emb, V, c.word_dim);
    detail::write_tensor(out, "pos_head_emb", P.pos_head_emb, pos_rows(c), c.pos_dim);
    detail::write_tensor(out, "pos_tail_emb", P.pos_tail_emb, pos_rows(c), c.pos_dim);
    detail::write_tensor(out, "conv_w", P.conv_w, c.n_filters,
                         static_cast<std::size_t>(c.conv_window) * in);
    detail::write_tensor(out, "conv_b", P.conv_b, 1, c.n_filters);
    detail::write_tensor(out, "att_A", P.att_A, R, R);
    detail::write_tensor(out, "att_q", P.att_q, kNumRelations, R);
    detail::write_tensor(out, "cls_w", P.cls_w, kNumRelations, R);
    detail::write_tensor(out, "cls_b", P.cls_b, 1, kNumRelations);
    if (!out) throw DataError("failed while writing checkpoint: " + path);
}

inline Parameters load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "fairnre-model" || version != "v1")
        throw DataError("not a fairnre-model v1 checkpoint: " + path);

    ModelConfig c;
    auto expect_key = [&](const char* key) {
        std::string k;
        if (!(in >> k) || k != key) throw DataError("checkpoint: expected key '" + std::string(key) + "'");
    };
    std::string sval;
    expect_key("encoder");
    in >> sval;
    c.encoder = parse_encoder(sval);
    expect_key("selector");
    in >> sval;
    c.selector = parse_selector(sval);
    expect_key("word_dim");
    in >> c.word_dim;
    expect_key("pos_dim");
    in >> c.pos_dim;
    expect_key("max_len");
    in >> c.max_len;
    expect_key("max_rel_pos");
    in >> c.max_rel_pos;
    expect_key("n_filters");
    in >> c.n_filters;
    expect_key("conv_window");
    in >> c.conv_window;
    expect_key("dropout_p");
    in >> c.dropout_p;
    expect_key("lr");
    in >> c.lr;
    expect_key("batch_size");
    in >> c.batch_size;
    expect_key("max_epochs");
    in >> c.max_epochs;
    expect_key("patience");
    in >> c.patience;
    expect_key("seed");
    in >> c.seed;
    int flag = 0;
    expect_key("per_sentence");
    in >> flag;
    c.per_sentence = flag != 0;
    expect_key("freeze_embeddings");
    in >> flag;
    c.freeze_embeddings = flag != 0;
    if (!in) throw DataError("checkpoint: malformed config block");
    validate(c);

    expect_key("vocab");
    int n_words = 0;
    in >> n_words;
    if (!in || n_words < 0) throw DataError("checkpoint: bad vocab size");
    std::vector<std::string> words(n_words);
    std::vector<long> counts(n_words);
    for (int i = 0; i < n_words; ++i)
        if (!(in >> words[i] >> counts[i])) throw DataError("checkpoint: truncated vocab");

    Parameters P;
    P.config = c;
    P.vocab = embeddings::Vocabulary(std::move(words), std::move(counts));
    const int V = P.vocab.size(), in_dim_ = input_dim(c), R = rep_dim(c);
    P.word_emb = detail::read_tensor(in, "word_emb", V, c.word_dim);
    P.pos_head_emb = detail::read_tensor(in, "pos_head_emb", pos_rows(c), c.pos_dim);
    P.pos_tail_emb = detail::read_tensor(in, "pos_tail_emb", pos_rows(c), c.pos_dim);
    P.conv_w = detail::read_tensor(in, "conv_w", c.n_filters,
                                   static_cast<std::size_t>(c.conv_window) * in_dim_);
    P.conv_b = detail::read_tensor(in, "conv_b", 1, c.n_filters);
    P.att_A = detail::read_tensor(in, "att_A", R, R);
    P.att_q = detail::read_tensor(in, "att_q", kNumRelations, R);
    P.cls_w = detail::read_tensor(in, "cls_w", kNumRelations, R);
    P.cls_b = detail::read_tensor(in, "cls_b", 1, kNumRelations);
    return P;
}

}  // namespace fairnre::model
