#pragma once
// Experiment orchestration: the end-to-end pipeline (corpus construction →
// optional equalize/augment → embedding training → optional debias →
// multi-seed model training → fairness metrics → aggregation), the 8-row
// mitigation grid, and deterministic report emission with full config and
// input-hash provenance.

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairnre/augmentation.hpp"
#include "fairnre/corpus.hpp"
#include "fairnre/debias.hpp"
#include "fairnre/defaults.hpp"
#include "fairnre/embeddings.hpp"
#include "fairnre/jsonl.hpp"
#include "fairnre/metrics.hpp"
#include "fairnre/model.hpp"
#include "fairnre/sha1.hpp"
#include "fairnre/types.hpp"
#include "fairnre/vocab.hpp"

namespace fairnre::experiments {

struct ExperimentConfig {
    // Mitigation flags (the three boolean columns of the grid).
    bool equalize = false;
    bool debias = false;
    bool augment = false;

    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};

    // Inputs.  Either articles+triples (alignment runs) or a prebuilt
    // instances file; optional pretrained embeddings skip SGNS training.
    std::string articles_path;
    std::string triples_path;
    std::string instances_path;
    std::string embeddings_path;
    std::string lexicon_path;            // swap lexicon (default: built-in)
    std::string annotations_path;        // test-set adjudication votes
    std::string definitional_pairs_path; // default: built-in
    std::string equalize_pairs_path;     // default: built-in
    std::string gendered_words_path;     // default: built-in
    std::string output_dir;              // empty: compute only, write nothing
    std::string config_path;             // config file used, for provenance

    // Split construction.
    double train_ratio = 0.7;
    double dev_ratio = 0.1;
    double test_ratio = 0.2;
    std::uint64_t split_seed = 0;
    corpus::MatchMode match_mode = corpus::MatchMode::any_token;

    // Embedding training.
    embeddings::SgnsConfig sgns;
    int min_count = 5;

    model::ModelConfig model;
};

inline void validate(const ExperimentConfig& c) {
    if (c.seeds.empty()) throw ConfigError("run.seeds must be non-empty");
    std::set<std::uint64_t> uniq(c.seeds.begin(), c.seeds.end());
    if (uniq.size() != c.seeds.size()) throw ConfigError("run.seeds must be distinct");
    model::validate(c.model);
    if (c.min_count < 1) throw ConfigError("embedding.min_count must be >= 1");
    if (c.embeddings_path.empty() && c.sgns.dim != c.model.word_dim)
        throw ConfigError("embedding.dim (" + std::to_string(c.sgns.dim) +
                          ") must equal model.word_dim (" + std::to_string(c.model.word_dim) + ")");
    if (c.instances_path.empty() && (c.articles_path.empty() || c.triples_path.empty()))
        throw ConfigError("either an instances file or both articles and triples files are required");
}

// --- flat key=value configuration -----------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long out = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": '" + v + "'");
    }
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    std::string cur;
    std::stringstream ss(v);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (cur.empty()) continue;
        out.push_back(static_cast<std::uint64_t>(parse_long(key, cur)));
    }
    if (out.empty()) throw ConfigError("empty seed list for " + key);
    return out;
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Applies one flat config key.  Unknown keys are configuration errors.
inline void apply_config_kv(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_long;
    if (key == "embedding.dim") c.sgns.dim = static_cast<int>(parse_long(key, value));
    else if (key == "embedding.window") c.sgns.window = static_cast<int>(parse_long(key, value));
    else if (key == "embedding.negatives") c.sgns.negatives = static_cast<int>(parse_long(key, value));
    else if (key == "embedding.epochs") c.sgns.epochs = static_cast<int>(parse_long(key, value));
    else if (key == "embedding.min_count") c.min_count = static_cast<int>(parse_long(key, value));
    else if (key == "embedding.lr") c.sgns.initial_lr = parse_double(key, value);
    else if (key == "embedding.subsample") c.sgns.subsample_t = parse_double(key, value);
    else if (key == "model.encoder") c.model.encoder = model::parse_encoder(value);
    else if (key == "model.selector") c.model.selector = model::parse_selector(value);
    else if (key == "model.word_dim") c.model.word_dim = static_cast<int>(parse_long(key, value));
    else if (key == "model.pos_dim") c.model.pos_dim = static_cast<int>(parse_long(key, value));
    else if (key == "model.max_len") c.model.max_len = static_cast<int>(parse_long(key, value));
    else if (key == "model.max_rel_pos") c.model.max_rel_pos = static_cast<int>(parse_long(key, value));
    else if (key == "model.filters") c.model.n_filters = static_cast<int>(parse_long(key, value));
    else if (key == "model.window") c.model.conv_window = static_cast<int>(parse_long(key, value));
    else if (key == "model.dropout") c.model.dropout_p = parse_double(key, value);
    else if (key == "train.lr") c.model.lr = parse_double(key, value);
    else if (key == "train.batch") c.model.batch_size = static_cast<int>(parse_long(key, value));
    else if (key == "train.epochs") c.model.max_epochs = static_cast<int>(parse_long(key, value));
    else if (key == "train.patience") c.model.patience = static_cast<int>(parse_long(key, value));
    else if (key == "run.seeds") c.seeds = detail::parse_seed_list(key, value);
    else if (key == "run.equalize") c.equalize = parse_bool(key, value);
    else if (key == "run.debias") c.debias = parse_bool(key, value);
    else if (key == "run.augment") c.augment = parse_bool(key, value);
    else if (key == "split.train_ratio") c.train_ratio = parse_double(key, value);
    else if (key == "split.dev_ratio") c.dev_ratio = parse_double(key, value);
    else if (key == "split.test_ratio") c.test_ratio = parse_double(key, value);
    else if (key == "split.seed") c.split_seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "split.match_mode") c.match_mode = corpus::parse_match_mode(value);
    else throw ConfigError("unknown config key: " + key);
}

inline void load_config_file(ExperimentConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        apply_config_kv(c, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    c.config_path = path;
}

// The full resolved configuration as ordered key=value pairs (provenance).
inline std::vector<std::pair<std::string, std::string>> config_to_kv(const ExperimentConfig& c) {
    using detail::fmt_double;
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    add("embedding.dim", std::to_string(c.sgns.dim));
    add("embedding.window", std::to_string(c.sgns.window));
    add("embedding.negatives", std::to_string(c.sgns.negatives));
    add("embedding.epochs", std::to_string(c.sgns.epochs));
    add("embedding.min_count", std::to_string(c.min_count));
    add("embedding.lr", fmt_double(c.sgns.initial_lr));
    add("embedding.subsample", fmt_double(c.sgns.subsample_t));
    add("embedding.seed", std::to_string(c.sgns.seed));
    add("embedding.workers", std::to_string(c.sgns.workers));
    add("model.encoder", model::encoder_name(c.model.encoder));
    add("model.selector", model::selector_name(c.model.selector));
    add("model.word_dim", std::to_string(c.model.word_dim));
    add("model.pos_dim", std::to_string(c.model.pos_dim));
    add("model.max_len", std::to_string(c.model.max_len));
    add("model.max_rel_pos", std::to_string(c.model.max_rel_pos));
    add("model.filters", std::to_string(c.model.n_filters));
    add("model.window", std::to_string(c.model.conv_window));
    add("model.dropout", fmt_double(c.model.dropout_p));
    add("model.per_sentence", c.model.per_sentence ? "true" : "false");
    add("model.freeze_embeddings", c.model.freeze_embeddings ? "true" : "false");
    add("train.lr", fmt_double(c.model.lr));
    add("train.batch", std::to_string(c.model.batch_size));
    add("train.epochs", std::to_string(c.model.max_epochs));
    add("train.patience", std::to_string(c.model.patience));
    std::string seeds;
    for (std::size_t i = 0; i < c.seeds.size(); ++i)
        seeds += (i ? "," : "") + std::to_string(c.seeds[i]);
    add("run.seeds", seeds);
    add("run.equalize", c.equalize ? "true" : "false");
    add("run.debias", c.debias ? "true" : "false");
    add("run.augment", c.augment ? "true" : "false");
    add("split.train_ratio", fmt_double(c.train_ratio));
    add("split.dev_ratio", fmt_double(c.dev_ratio));
    add("split.test_ratio", fmt_double(c.test_ratio));
    add("split.seed", std::to_string(c.split_seed));
    add("split.match_mode", c.match_mode == corpus::MatchMode::full ? "full" : "any-token");
    add("paths.articles", c.articles_path);
    add("paths.triples", c.triples_path);
    add("paths.instances", c.instances_path);
    add("paths.embeddings", c.embeddings_path);
    add("paths.lexicon", c.lexicon_path);
    add("paths.annotations", c.annotations_path);
    add("paths.definitional_pairs", c.definitional_pairs_path);
    add("paths.equalize_pairs", c.equalize_pairs_path);
    add("paths.gendered_words", c.gendered_words_path);
    add("paths.output", c.output_dir);
    return kv;
}

struct Provenance {
    std::vector<std::pair<std::string, std::string>> config_kv;
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, git blob sha1)
};

// --- report emission -------------------------------------------------------

inline std::string flag_label(bool equalize, bool debias, bool augment) {
    std::string s;
    if (equalize) s += "E";
    if (debias) s += s.empty() ? "D" : "+D";
    if (augment) s += s.empty() ? "A" : "+A";
    return s.empty() ? "none" : s;
}

inline nlohmann::ordered_json report_to_json(const metrics::MetricsReport& rep) {
    nlohmann::ordered_json j;
    j["runs"] = rep.runs;
    nlohmann::ordered_json fields;
    for (const auto& [name, value] : metrics::flatten(rep)) {
        nlohmann::ordered_json f;
        f["mean"] = value;
        f["stderr"] = rep.stderr_of(name);
        fields[name] = f;
    }
    j["metrics"] = fields;
    j["undefined_as_zero"] = metrics::undefined_fields(rep);
    return j;
}

inline nlohmann::ordered_json provenance_to_json(const Provenance& prov) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : prov.config_kv) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json inputs;
    for (const auto& [path, hash] : prov.inputs) inputs[path] = hash;
    j["inputs"] = inputs;
    return j;
}

inline void write_report_json(const std::string& path, const metrics::MetricsReport& rep,
                              const ExperimentConfig& cfg, const Provenance& prov) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json flags;
    flags["equalize"] = cfg.equalize;
    flags["debias"] = cfg.debias;
    flags["augment"] = cfg.augment;
    j["flags"] = flags;
    j["report"] = report_to_json(rep);
    j["provenance"] = provenance_to_json(prov);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

inline void write_report_csv(const std::string& path, const metrics::MetricsReport& rep,
                             const Provenance& prov) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << "# fairnre report\n";
    for (const auto& [k, v] : prov.config_kv) out << "# " << k << "=" << v << "\n";
    for (const auto& [p, h] : prov.inputs) out << "# input " << p << " " << h << "\n";
    out << "metric,mean,stderr\n";
    for (const auto& [name, value] : metrics::flatten(rep))
        out << name << "," << detail::fmt_double(value) << ","
            << detail::fmt_double(rep.stderr_of(name)) << "\n";
}

// One row per relation (per flag combination) with the gap columns used for
// external gap plots.
inline void write_plotdata_tsv(
    const std::string& path,
    const std::vector<std::pair<std::array<bool, 3>, const metrics::MetricsReport*>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write plot data: " + path);
    out << "combo\trelation\tf1_gap\tf1_gap_stderr\teoo_gap\teoo_gap_stderr\tf1_male\tf1_female\n";
    for (const auto& [flags, rep] : rows) {
        if (!rep) continue;
        for (int r = 0; r < kNumPositiveRelations; ++r) {
            std::string rel = relation_name(static_cast<Relation>(r));
            out << flag_label(flags[0], flags[1], flags[2]) << "\t" << rel << "\t"
                << detail::fmt_double(rep->f1_gap[r]) << "\t"
                << detail::fmt_double(rep->stderr_of(rel + ".f1_gap")) << "\t"
                << detail::fmt_double(rep->eoo_gap[r]) << "\t"
                << detail::fmt_double(rep->stderr_of(rel + ".eoo_gap")) << "\t"
                << detail::fmt_double(rep->scores.prf[r][metrics::kGroupMale].f1) << "\t"
                << detail::fmt_double(rep->scores.prf[r][metrics::kGroupFemale].f1) << "\n";
        }
    }
}

inline nlohmann::ordered_json split_stats_json(const DatasetSplit& split) {
    corpus::CorpusStats s = corpus::corpus_stats(split.instances);
    nlohmann::ordered_json j;
    for (int g = 0; g < 2; ++g) {
        nlohmann::ordered_json gj;
        for (int r = 0; r < kNumRelations; ++r)
            gj[relation_name(static_cast<Relation>(r))] = s.counts[g][r];
        gj["total"] = s.totals[g];
        j[gender_name(static_cast<Gender>(g))] = gj;
    }
    return j;
}

// --- pipeline ---------------------------------------------------------------

namespace detail {

template <class Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("stage " + name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("stage " + name + ": " + e.what());
    }
}

struct LoadedData {
    corpus::SplitResult split;
    std::vector<std::pair<std::string, std::string>> input_hashes;
    std::vector<std::string> warnings;
};

inline void hash_input(LoadedData& d, const std::string& path) {
    if (!path.empty()) d.input_hashes.emplace_back(path, file_blob_sha1(path));
}

inline LoadedData load_data(const ExperimentConfig& cfg) {
    return run_stage("load", [&]() {
        LoadedData d;
        std::vector<Instance> instances;
        if (!cfg.instances_path.empty()) {
            instances = load_instances(cfg.instances_path);
            hash_input(d, cfg.instances_path);
        } else {
            std::vector<EntityArticle> articles = load_articles(cfg.articles_path);
            std::vector<KnowledgeTriple> triples = load_triples(cfg.triples_path);
            hash_input(d, cfg.articles_path);
            hash_input(d, cfg.triples_path);
            corpus::AlignResult aligned = corpus::align_distant(articles, triples, cfg.match_mode);
            instances = std::move(aligned.instances);
            if (!aligned.skipped_triples.empty())
                d.warnings.push_back(std::to_string(aligned.skipped_triples.size()) +
                                     " triples skipped: head entity has no article");
        }
        d.split = corpus::split_by_head(instances, {cfg.train_ratio, cfg.dev_ratio, cfg.test_ratio},
                                        cfg.split_seed);
        for (const std::string& w : d.split.warnings) d.warnings.push_back(w);
        if (!cfg.annotations_path.empty()) {
            auto votes = load_annotations(cfg.annotations_path);
            hash_input(d, cfg.annotations_path);
            corpus::AnnotateResult ann = corpus::apply_test_annotations(d.split.test, votes);
            d.split.test = std::move(ann.split);
            for (const std::string& id : ann.skipped_ids)
                d.warnings.push_back("annotation for unknown instance '" + id + "' ignored");
        }
        // Auxiliary inputs consumed by later stages enter the provenance here
        // so every emitted report carries the full input fingerprint.
        hash_input(d, cfg.embeddings_path);
        hash_input(d, cfg.lexicon_path);
        hash_input(d, cfg.definitional_pairs_path);
        hash_input(d, cfg.equalize_pairs_path);
        hash_input(d, cfg.gendered_words_path);
        return d;
    });
}

struct CoreResult {
    metrics::MetricsReport aggregate;
    std::vector<std::vector<PredictionRecord>> per_seed_records;
    DatasetSplit train_final, dev_final;
    std::vector<std::string> warnings;
};

// Raw (pre-debias) embeddings keyed by the (equalize, augment) pair that
// shaped the training text; shared across grid rows.
using EmbeddingCache = std::map<std::pair<bool, bool>, embeddings::EmbeddingMatrix>;

inline CoreResult run_core(const ExperimentConfig& cfg, const LoadedData& data,
                           EmbeddingCache* cache) {
    CoreResult res;

    DatasetSplit train = data.split.train;
    DatasetSplit dev = data.split.dev;
    const DatasetSplit& test = data.split.test;

    if (cfg.equalize) {
        run_stage("equalize", [&]() {
            // An empty split (e.g. dev_ratio 0) has nothing to balance.
            if (!train.instances.empty()) train = corpus::equalize_split(train, cfg.split_seed);
            if (!dev.instances.empty()) dev = corpus::equalize_split(dev, cfg.split_seed);
            return 0;
        });
    }

    if (cfg.augment) {
        run_stage("augment", [&]() {
            std::vector<std::pair<std::string, std::string>> pairs =
                cfg.lexicon_path.empty() ? defaults::swap_pairs()
                                         : load_word_pairs(cfg.lexicon_path);
            augmentation::SwapLexicon lex =
                augmentation::validate_lexicon(pairs, /*first_wins=*/true, &res.warnings);
            train = augmentation::augment_split(train, lex);
            return 0;
        });
    }
    res.train_final = train;
    res.dev_final = dev;

    embeddings::EmbeddingMatrix emb = run_stage("embeddings", [&]() {
        if (!cfg.embeddings_path.empty()) return embeddings::load_embeddings_text(cfg.embeddings_path);
        std::pair<bool, bool> key{cfg.equalize, cfg.augment};
        if (cache) {
            auto it = cache->find(key);
            if (it != cache->end()) return it->second;
        }
        embeddings::Vocabulary vocab = embeddings::build_vocabulary(train.instances, cfg.min_count);
        embeddings::EmbeddingMatrix m = embeddings::train_sgns(train.instances, vocab, cfg.sgns);
        if (cache) cache->emplace(key, m);
        return m;
    });

    if (cfg.debias) {
        run_stage("debias", [&]() {
            std::vector<std::pair<std::string, std::string>> def_pairs =
                cfg.definitional_pairs_path.empty() ? defaults::definitional_pairs()
                                                    : load_word_pairs(cfg.definitional_pairs_path);
            std::set<std::string> gendered;
            if (cfg.gendered_words_path.empty()) {
                gendered = defaults::gender_specific_words();
            } else {
                for (const std::string& w : load_word_list(cfg.gendered_words_path))
                    gendered.insert(w);
            }
            std::vector<std::pair<std::string, std::string>> eq_pairs =
                cfg.equalize_pairs_path.empty() ? defaults::equalize_pairs()
                                                : load_word_pairs(cfg.equalize_pairs_path);
            embeddings::GenderDirection dir = embeddings::gender_direction(emb, def_pairs);
            emb = embeddings::hard_debias(emb, dir, gendered, eq_pairs, &res.warnings);
            return 0;
        });
    }

    std::vector<metrics::MetricsReport> reports;
    run_stage("train", [&]() {
        for (std::uint64_t seed : cfg.seeds) {
            model::ModelConfig mcfg = cfg.model;
            mcfg.seed = seed;
            model::TrainResult tr = model::train_model(train, dev, emb, mcfg);
            std::vector<PredictionRecord> recs = model::predict(tr.params, test, mcfg);
            reports.push_back(metrics::performance_parity(recs));
            res.per_seed_records.push_back(std::move(recs));
        }
        return 0;
    });
    res.aggregate = run_stage("metrics", [&]() { return metrics::aggregate_runs(reports); });
    return res;
}

// Removes files this run wrote, best effort, when a stage fails.
struct OutputTracker {
    std::vector<std::string> written;

    void track(const std::string& path) { written.push_back(path); }
    void discard_all() {
        std::error_code ec;
        for (const std::string& p : written) std::filesystem::remove(p, ec);
        written.clear();
    }
};

inline void emit_run_outputs(const ExperimentConfig& cfg, const LoadedData& data,
                             const CoreResult& core, const Provenance& prov, OutputTracker& fs_out) {
    if (cfg.output_dir.empty()) return;
    std::filesystem::create_directories(cfg.output_dir);
    std::string base = cfg.output_dir + "/";

    for (std::size_t i = 0; i < core.per_seed_records.size(); ++i) {
        std::string p = base + "records_seed" + std::to_string(cfg.seeds[i]) + ".jsonl";
        fs_out.track(p);
        save_records(p, core.per_seed_records[i]);
    }

    nlohmann::ordered_json stats;
    stats["train"] = split_stats_json(core.train_final);
    stats["dev"] = split_stats_json(core.dev_final);
    stats["test"] = split_stats_json(data.split.test);
    std::string stats_path = base + "splits_stats.json";
    fs_out.track(stats_path);
    {
        std::ofstream out(stats_path);
        if (!out) throw DataError("cannot write stats: " + stats_path);
        out << stats.dump(2) << "\n";
    }

    fs_out.track(base + "report.json");
    write_report_json(base + "report.json", core.aggregate, cfg, prov);
    fs_out.track(base + "report.csv");
    write_report_csv(base + "report.csv", core.aggregate, prov);
    fs_out.track(base + "report_plotdata.tsv");
    write_plotdata_tsv(base + "report_plotdata.tsv",
                       {{{cfg.equalize, cfg.debias, cfg.augment}, &core.aggregate}});
}

}  // namespace detail

struct PipelineResult {
    metrics::MetricsReport report;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;  // files written (empty when output_dir is empty)
};

inline PipelineResult run_pipeline(const ExperimentConfig& cfg) {
    validate(cfg);
    detail::LoadedData data = detail::load_data(cfg);
    detail::OutputTracker tracker;
    try {
        detail::CoreResult core = detail::run_core(cfg, data, nullptr);
        Provenance prov;
        prov.config_kv = config_to_kv(cfg);
        prov.inputs = data.input_hashes;
        if (!cfg.config_path.empty())
            prov.inputs.emplace_back(cfg.config_path, file_blob_sha1(cfg.config_path));
        detail::run_stage("emit", [&]() {
            detail::emit_run_outputs(cfg, data, core, prov, tracker);
            return 0;
        });
        PipelineResult result;
        result.report = core.aggregate;
        result.warnings = data.warnings;
        for (const std::string& w : core.warnings) result.warnings.push_back(w);
        result.outputs = tracker.written;
        return result;
    } catch (...) {
        tracker.discard_all();
        throw;
    }
}

// --- mitigation grid --------------------------------------------------------

struct GridRow {
    bool equalize = false;
    bool debias = false;
    bool augment = false;
    bool ok = false;
    std::string error;
    metrics::MetricsReport report;
};

struct GridReport {
    std::array<GridRow, 8> rows;
    std::vector<std::string> outputs;
};

// Flag triples in published row order: (—), (E), (D), (A), (E,D), (E,A),
// (D,A), (E,D,A).
inline std::array<std::array<bool, 3>, 8> grid_order() {
    return {{{false, false, false},
             {true, false, false},
             {false, true, false},
             {false, false, true},
             {true, true, false},
             {true, false, true},
             {false, true, true},
             {true, true, true}}};
}

inline void write_grid_csv(const std::string& path, const GridReport& grid, const Provenance& prov) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write grid report: " + path);
    out << "# fairnre grid report\n";
    for (const auto& [k, v] : prov.config_kv)
        if (k != "run.equalize" && k != "run.debias" && k != "run.augment")
            out << "# " << k << "=" << v << "\n";
    for (const auto& [p, h] : prov.inputs) out << "# input " << p << " " << h << "\n";
    out << "row,label,equalize,debias,augment,eoo,eoo_stderr,pps,pps_stderr,macro_f1,"
           "macro_f1_stderr,disparity_score,disparity_score_stderr,error\n";
    for (std::size_t i = 0; i < grid.rows.size(); ++i) {
        const GridRow& r = grid.rows[i];
        out << (i + 1) << "," << flag_label(r.equalize, r.debias, r.augment) << ","
            << (r.equalize ? 1 : 0) << "," << (r.debias ? 1 : 0) << "," << (r.augment ? 1 : 0);
        if (r.ok) {
            out << "," << detail::fmt_double(r.report.eoo) << ","
                << detail::fmt_double(r.report.stderr_of("eoo")) << ","
                << detail::fmt_double(r.report.pps) << ","
                << detail::fmt_double(r.report.stderr_of("pps")) << ","
                << detail::fmt_double(r.report.macro_f1) << ","
                << detail::fmt_double(r.report.stderr_of("macro_f1")) << ","
                << detail::fmt_double(r.report.disparity) << ","
                << detail::fmt_double(r.report.stderr_of("disparity_score")) << ",";
        } else {
            out << ",,,,,,,,";
        }
        std::string err = r.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        out << err << "\n";
    }
}

inline GridReport run_grid(ExperimentConfig cfg) {
    validate(cfg);
    detail::LoadedData data = detail::load_data(cfg);
    detail::EmbeddingCache cache;
    GridReport grid;
    detail::OutputTracker tracker;
    std::string root = cfg.output_dir;

    try {
        auto order = grid_order();
        for (std::size_t i = 0; i < order.size(); ++i) {
            GridRow& row = grid.rows[i];
            row.equalize = cfg.equalize = order[i][0];
            row.debias = cfg.debias = order[i][1];
            row.augment = cfg.augment = order[i][2];
            cfg.output_dir = root.empty() ? "" : root + "/row" + std::to_string(i + 1);
            try {
                detail::CoreResult core = detail::run_core(cfg, data, &cache);
                row.report = core.aggregate;
                row.ok = true;
                Provenance prov;
                prov.config_kv = config_to_kv(cfg);
                prov.inputs = data.input_hashes;
                detail::emit_run_outputs(cfg, data, core, prov, tracker);
            } catch (const std::exception& e) {
                row.error = e.what();  // this row failed; remaining rows continue
            }
        }

        cfg.output_dir = root;
        if (!root.empty()) {
            std::filesystem::create_directories(root);
            Provenance prov;
            prov.config_kv = config_to_kv(cfg);
            prov.inputs = data.input_hashes;
            if (!cfg.config_path.empty())
                prov.inputs.emplace_back(cfg.config_path, file_blob_sha1(cfg.config_path));

            std::string csv = root + "/grid.csv";
            tracker.track(csv);
            write_grid_csv(csv, grid, prov);

            nlohmann::ordered_json j;
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < grid.rows.size(); ++i) {
                const GridRow& r = grid.rows[i];
                nlohmann::ordered_json rj;
                rj["row"] = i + 1;
                rj["label"] = flag_label(r.equalize, r.debias, r.augment);
                rj["equalize"] = r.equalize;
                rj["debias"] = r.debias;
                rj["augment"] = r.augment;
                rj["ok"] = r.ok;
                if (r.ok) rj["report"] = report_to_json(r.report);
                else rj["error"] = r.error;
                rows.push_back(rj);
            }
            j["rows"] = rows;
            j["provenance"] = provenance_to_json(prov);
            std::string jpath = root + "/grid.json";
            tracker.track(jpath);
            {
                std::ofstream out(jpath);
                if (!out) throw DataError("cannot write grid report: " + jpath);
                out << j.dump(2) << "\n";
            }

            std::vector<std::pair<std::array<bool, 3>, const metrics::MetricsReport*>> plot_rows;
            for (const GridRow& r : grid.rows)
                plot_rows.push_back({{r.equalize, r.debias, r.augment}, r.ok ? &r.report : nullptr});
            std::string tsv = root + "/grid_plotdata.tsv";
            tracker.track(tsv);
            write_plotdata_tsv(tsv, plot_rows);
        }
        grid.outputs = tracker.written;
        return grid;
    } catch (...) {
        tracker.discard_all();
        throw;
    }
}

}  // namespace fairnre::experiments
