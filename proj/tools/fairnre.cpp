// fairnre: command-line front end for the gender-fairness relation-extraction
// toolkit.  One subcommand per pipeline step plus `run` (single configuration
// end to end) and `grid` (all eight mitigation combinations).
//
// Exit codes: 0 success, 1 configuration/usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairnre/augmentation.hpp"
#include "fairnre/corpus.hpp"
#include "fairnre/debias.hpp"
#include "fairnre/defaults.hpp"
#include "fairnre/embeddings.hpp"
#include "fairnre/jsonl.hpp"
#include "fairnre/metrics.hpp"
#include "fairnre/model.hpp"
#include "fairnre/pipeline.hpp"
#include "fairnre/sha1.hpp"
#include "fairnre/synthetic.hpp"
#include "fairnre/types.hpp"
#include "fairnre/vocab.hpp"

namespace {

using namespace fairnre;

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void print_report_summary(const metrics::MetricsReport& rep) {
    std::printf("runs            %d\n", rep.runs);
    std::printf("macro_f1        %s (stderr %s)\n", fmt(rep.macro_f1).c_str(),
                fmt(rep.stderr_of("macro_f1")).c_str());
    std::printf("disparity_score %s (stderr %s)\n", fmt(rep.disparity).c_str(),
                fmt(rep.stderr_of("disparity_score")).c_str());
    std::printf("pps             %s (stderr %s)\n", fmt(rep.pps).c_str(),
                fmt(rep.stderr_of("pps")).c_str());
    std::printf("eoo             %s (stderr %s)\n", fmt(rep.eoo).c_str(),
                fmt(rep.stderr_of("eoo")).c_str());
    for (int r = 0; r < kNumPositiveRelations; ++r) {
        const char* rel = relation_name(static_cast<Relation>(r));
        std::printf("%-10s f1_gap %9s  eoo_gap %9s  f1(m) %s  f1(f) %s\n", rel,
                    fmt(rep.f1_gap[r]).c_str(), fmt(rep.eoo_gap[r]).c_str(),
                    fmt(rep.scores.prf[r][metrics::kGroupMale].f1).c_str(),
                    fmt(rep.scores.prf[r][metrics::kGroupFemale].f1).c_str());
    }
}

// --- build-corpus ------------------------------------------------------------

struct BuildCorpusOpts {
    std::string articles, triples, annotations, out;
    std::string match_mode = "any-token";
    double train_ratio = 0.7, dev_ratio = 0.1, test_ratio = 0.2;
    std::uint64_t seed = 0;
};

void setup_build_corpus(CLI::App& app) {
    auto o = std::make_shared<BuildCorpusOpts>();
    CLI::App* sub = app.add_subcommand(
        "build-corpus", "Align articles with triples and write head-disjoint splits");
    sub->add_option("--articles", o->articles, "entity articles (jsonl)")->required();
    sub->add_option("--triples", o->triples, "knowledge triples (jsonl)")->required();
    sub->add_option("--annotations", o->annotations, "test-set adjudication votes (jsonl)");
    sub->add_option("--match-mode", o->match_mode, "tail matching: full | any-token");
    sub->add_option("--train-ratio", o->train_ratio, "train fraction");
    sub->add_option("--dev-ratio", o->dev_ratio, "dev fraction");
    sub->add_option("--test-ratio", o->test_ratio, "test fraction");
    sub->add_option("--seed", o->seed, "split shuffle seed");
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o]() {
        std::vector<EntityArticle> articles = load_articles(o->articles);
        std::vector<KnowledgeTriple> triples = load_triples(o->triples);
        corpus::AlignResult aligned =
            corpus::align_distant(articles, triples, corpus::parse_match_mode(o->match_mode));
        if (!aligned.skipped_triples.empty())
            std::cerr << "warning: " << aligned.skipped_triples.size()
                      << " triples skipped (no article for head)\n";
        corpus::SplitResult split = corpus::split_by_head(
            aligned.instances, {o->train_ratio, o->dev_ratio, o->test_ratio}, o->seed);
        print_warnings(split.warnings);
        if (!o->annotations.empty()) {
            corpus::AnnotateResult ann =
                corpus::apply_test_annotations(split.test, load_annotations(o->annotations));
            split.test = ann.split;
            for (const std::string& id : ann.skipped_ids)
                std::cerr << "warning: annotation for unknown instance '" << id << "' ignored\n";
        }
        std::filesystem::create_directories(o->out);
        save_instances(o->out + "/train.jsonl", split.train.instances);
        save_instances(o->out + "/dev.jsonl", split.dev.instances);
        save_instances(o->out + "/test.jsonl", split.test.instances);
        nlohmann::ordered_json stats;
        stats["train"] = experiments::split_stats_json(split.train);
        stats["dev"] = experiments::split_stats_json(split.dev);
        stats["test"] = experiments::split_stats_json(split.test);
        std::ofstream sf(o->out + "/stats.json");
        if (!sf) throw DataError("cannot write " + o->out + "/stats.json");
        sf << stats.dump(2) << "\n";
        std::printf("instances: train %zu, dev %zu, test %zu\n", split.train.instances.size(),
                    split.dev.instances.size(), split.test.instances.size());
    });
}

// --- equalize ----------------------------------------------------------------

struct EqualizeOpts {
    std::string instances, out;
    std::uint64_t seed = 0;
};

void setup_equalize(CLI::App& app) {
    auto o = std::make_shared<EqualizeOpts>();
    CLI::App* sub = app.add_subcommand(
        "equalize", "Downsample the majority gender of an instance file to parity");
    sub->add_option("--instances", o->instances, "instances (jsonl)")->required();
    sub->add_option("--seed", o->seed, "sampling seed");
    sub->add_option("--out", o->out, "output instances (jsonl)")->required();
    sub->callback([o]() {
        DatasetSplit split{SplitName::train, load_instances(o->instances)};
        DatasetSplit eq = corpus::equalize_split(split, o->seed);
        save_instances(o->out, eq.instances);
        std::printf("instances: %zu -> %zu\n", split.instances.size(), eq.instances.size());
    });
}

// --- train-embeddings ---------------------------------------------------------

struct TrainEmbOpts {
    std::string instances, out;
    embeddings::SgnsConfig sgns;
    int min_count = 5;
};

void setup_train_embeddings(CLI::App& app) {
    auto o = std::make_shared<TrainEmbOpts>();
    CLI::App* sub =
        app.add_subcommand("train-embeddings", "Train skip-gram negative-sampling embeddings");
    sub->add_option("--instances", o->instances, "training instances (jsonl)")->required();
    sub->add_option("--dim", o->sgns.dim, "embedding dimension");
    sub->add_option("--window", o->sgns.window, "context window");
    sub->add_option("--negatives", o->sgns.negatives, "negative samples per positive");
    sub->add_option("--epochs", o->sgns.epochs, "training epochs");
    sub->add_option("--lr", o->sgns.initial_lr, "initial learning rate");
    sub->add_option("--subsample", o->sgns.subsample_t, "frequent-word subsampling threshold");
    sub->add_option("--min-count", o->min_count, "minimum token frequency");
    sub->add_option("--seed", o->sgns.seed, "random seed");
    sub->add_option("--workers", o->sgns.workers, "training threads (1 = deterministic)");
    sub->add_option("--out", o->out, "output embeddings (text)")->required();
    sub->callback([o]() {
        std::vector<Instance> instances = load_instances(o->instances);
        embeddings::Vocabulary vocab = embeddings::build_vocabulary(instances, o->min_count);
        embeddings::EmbeddingMatrix emb = embeddings::train_sgns(instances, vocab, o->sgns);
        embeddings::save_embeddings_text(o->out, emb);
        std::printf("vocabulary %d words, dim %d\n", emb.vocab.size(), emb.dim);
    });
}

// --- debias-embeddings ---------------------------------------------------------

struct DebiasOpts {
    std::string embeddings, out, definitional, gendered, equalize_pairs;
};

void setup_debias(CLI::App& app) {
    auto o = std::make_shared<DebiasOpts>();
    CLI::App* sub =
        app.add_subcommand("debias-embeddings", "Hard-debias embeddings along the gender direction");
    sub->add_option("--embeddings", o->embeddings, "input embeddings (text)")->required();
    sub->add_option("--definitional-pairs", o->definitional, "definitional pair file (default built-in)");
    sub->add_option("--gendered-words", o->gendered, "gender-specific word list (default built-in)");
    sub->add_option("--equalize-pairs", o->equalize_pairs, "equalize pair file (default built-in)");
    sub->add_option("--out", o->out, "output embeddings (text)")->required();
    sub->callback([o]() {
        embeddings::EmbeddingMatrix emb = embeddings::load_embeddings_text(o->embeddings);
        std::vector<std::pair<std::string, std::string>> def =
            o->definitional.empty() ? defaults::definitional_pairs()
                                    : load_word_pairs(o->definitional);
        std::set<std::string> gendered;
        if (o->gendered.empty()) {
            gendered = defaults::gender_specific_words();
        } else {
            for (const std::string& w : load_word_list(o->gendered)) gendered.insert(w);
        }
        std::vector<std::pair<std::string, std::string>> eq =
            o->equalize_pairs.empty() ? defaults::equalize_pairs()
                                      : load_word_pairs(o->equalize_pairs);
        embeddings::GenderDirection dir = embeddings::gender_direction(emb, def);
        std::vector<std::string> warnings;
        embeddings::EmbeddingMatrix out = embeddings::hard_debias(emb, dir, gendered, eq, &warnings);
        print_warnings(warnings);
        embeddings::save_embeddings_text(o->out, out);
        std::printf("debiased %d words (direction %s)\n", out.vocab.size(),
                    dir.flipped ? "flipped to he-positive" : "he-positive");
    });
}

// --- augment -------------------------------------------------------------------

struct AugmentOpts {
    std::string instances, out, lexicon;
    bool strict = false;
    bool no_flip_gender = false;
};

void setup_augment(CLI::App& app) {
    auto o = std::make_shared<AugmentOpts>();
    CLI::App* sub =
        app.add_subcommand("augment", "Append gender-swapped counterfactual copies of every instance");
    sub->add_option("--instances", o->instances, "instances (jsonl)")->required();
    sub->add_option("--lexicon", o->lexicon, "swap lexicon (tsv, default built-in)");
    sub->add_flag("--strict", o->strict, "reject lexicon conflicts instead of keeping first mapping");
    sub->add_flag("--no-flip-gender", o->no_flip_gender,
                  "keep the original gender label on augmented copies");
    sub->add_option("--out", o->out, "output instances (jsonl)")->required();
    sub->callback([o]() {
        DatasetSplit split{SplitName::train, load_instances(o->instances)};
        std::vector<std::pair<std::string, std::string>> pairs =
            o->lexicon.empty() ? defaults::swap_pairs() : load_word_pairs(o->lexicon);
        std::vector<std::string> warnings;
        augmentation::SwapLexicon lex =
            augmentation::validate_lexicon(pairs, /*first_wins=*/!o->strict, &warnings);
        print_warnings(warnings);
        DatasetSplit out = augmentation::augment_split(split, lex, !o->no_flip_gender);
        save_instances(o->out, out.instances);
        std::printf("instances: %zu -> %zu\n", split.instances.size(), out.instances.size());
    });
}

// --- train -----------------------------------------------------------------------

struct TrainOpts {
    std::string train, dev, embeddings, out;
    std::string encoder = "pcnn", selector = "att";
    model::ModelConfig cfg;
};

void setup_train(CLI::App& app) {
    auto o = std::make_shared<TrainOpts>();
    CLI::App* sub = app.add_subcommand("train", "Train a bag-level relation extractor");
    sub->add_option("--train", o->train, "training instances (jsonl)")->required();
    sub->add_option("--dev", o->dev, "dev instances for early stopping (jsonl)");
    sub->add_option("--embeddings", o->embeddings, "word embeddings (text)")->required();
    sub->add_option("--encoder", o->encoder, "cnn | pcnn");
    sub->add_option("--selector", o->selector, "att | ave");
    sub->add_option("--pos-dim", o->cfg.pos_dim, "position embedding dimension");
    sub->add_option("--max-len", o->cfg.max_len, "maximum sentence length");
    sub->add_option("--max-rel-pos", o->cfg.max_rel_pos, "relative position clip");
    sub->add_option("--filters", o->cfg.n_filters, "convolution filters");
    sub->add_option("--window", o->cfg.conv_window, "convolution window (odd)");
    sub->add_option("--dropout", o->cfg.dropout_p, "dropout probability on bag representations");
    sub->add_option("--lr", o->cfg.lr, "SGD learning rate");
    sub->add_option("--batch", o->cfg.batch_size, "bags per batch");
    sub->add_option("--epochs", o->cfg.max_epochs, "maximum epochs");
    sub->add_option("--patience", o->cfg.patience, "early-stopping patience (dev evaluations)");
    sub->add_option("--seed", o->cfg.seed, "random seed");
    sub->add_flag("--per-sentence", o->cfg.per_sentence, "treat each instance as a singleton bag");
    sub->add_flag("--freeze-embeddings", o->cfg.freeze_embeddings, "do not fine-tune the word table");
    sub->add_option("--out", o->out, "output checkpoint path")->required();
    sub->callback([o]() {
        DatasetSplit train{SplitName::train, load_instances(o->train)};
        DatasetSplit dev{SplitName::dev, {}};
        if (!o->dev.empty()) dev.instances = load_instances(o->dev);
        embeddings::EmbeddingMatrix emb = embeddings::load_embeddings_text(o->embeddings);
        o->cfg.encoder = model::parse_encoder(o->encoder);
        o->cfg.selector = model::parse_selector(o->selector);
        o->cfg.word_dim = emb.dim;
        model::TrainResult tr = model::train_model(train, dev, emb, o->cfg);
        model::save_checkpoint(tr.params, o->out);
        std::printf("best epoch %d, dev macro F1 %s\n", tr.best_epoch,
                    fmt(tr.best_dev_f1).c_str());
    });
}

// --- predict -----------------------------------------------------------------------

struct PredictOpts {
    std::string model_path, instances, out;
};

void setup_predict(CLI::App& app) {
    auto o = std::make_shared<PredictOpts>();
    CLI::App* sub = app.add_subcommand("predict", "Predict bag relations with a trained model");
    sub->add_option("--model", o->model_path, "model checkpoint")->required();
    sub->add_option("--instances", o->instances, "instances (jsonl)")->required();
    sub->add_option("--out", o->out, "output prediction records (jsonl)")->required();
    sub->callback([o]() {
        model::Parameters P = model::load_checkpoint(o->model_path);
        DatasetSplit split{SplitName::train, load_instances(o->instances)};
        std::vector<PredictionRecord> recs = model::predict(P, split, P.config);
        save_records(o->out, recs);
        std::printf("wrote %zu records\n", recs.size());
    });
}

// --- evaluate -----------------------------------------------------------------------

struct EvaluateOpts {
    std::vector<std::string> records;
    std::string out_json, out_csv;
};

void setup_evaluate(CLI::App& app) {
    auto o = std::make_shared<EvaluateOpts>();
    CLI::App* sub =
        app.add_subcommand("evaluate", "Fairness metrics from prediction records (multi-run aware)");
    sub->add_option("--records", o->records, "prediction record files, one per run (jsonl)")
        ->required()
        ->expected(-1);
    sub->add_option("--out-json", o->out_json, "write the full report as JSON");
    sub->add_option("--out-csv", o->out_csv, "write the full report as CSV");
    sub->callback([o]() {
        std::vector<metrics::MetricsReport> runs;
        for (const std::string& path : o->records)
            runs.push_back(metrics::performance_parity(load_records(path)));
        metrics::MetricsReport rep = metrics::aggregate_runs(runs);
        print_report_summary(rep);
        for (const std::string& f : metrics::undefined_fields(rep))
            std::cerr << "warning: " << f << " undefined (0/0), reported as 0\n";
        experiments::Provenance prov;
        for (const std::string& path : o->records) prov.inputs.emplace_back(path, file_blob_sha1(path));
        if (!o->out_json.empty()) {
            nlohmann::ordered_json j;
            j["report"] = experiments::report_to_json(rep);
            j["provenance"] = experiments::provenance_to_json(prov);
            std::ofstream out(o->out_json);
            if (!out) throw DataError("cannot write " + o->out_json);
            out << j.dump(2) << "\n";
        }
        if (!o->out_csv.empty()) experiments::write_report_csv(o->out_csv, rep, prov);
    });
}

// --- kappa -------------------------------------------------------------------------

struct KappaOpts {
    std::string annotations;
};

void setup_kappa(CLI::App& app) {
    auto o = std::make_shared<KappaOpts>();
    CLI::App* sub =
        app.add_subcommand("kappa", "Fleiss' kappa over an annotation vote file");
    sub->add_option("--annotations", o->annotations, "annotation votes (jsonl)")->required();
    sub->callback([o]() {
        auto votes = load_annotations(o->annotations);
        std::set<std::string> answer_set;
        for (const auto& [id, answers] : votes)
            for (const std::string& a : answers) answer_set.insert(a);
        std::vector<std::string> categories(answer_set.begin(), answer_set.end());
        std::vector<std::vector<long>> table;
        for (const auto& [id, answers] : votes) {
            std::vector<long> row(categories.size(), 0);
            for (const std::string& a : answers)
                for (std::size_t c = 0; c < categories.size(); ++c)
                    if (categories[c] == a) row[c]++;
            table.push_back(row);
        }
        double kappa = metrics::fleiss_kappa(table);
        std::printf("items %zu, categories %zu, fleiss_kappa %s\n", table.size(),
                    categories.size(), fmt(kappa).c_str());
    });
}

// --- stats -------------------------------------------------------------------------

struct StatsOpts {
    std::string instances;
};

void setup_stats(CLI::App& app) {
    auto o = std::make_shared<StatsOpts>();
    CLI::App* sub =
        app.add_subcommand("stats", "Per-gender relation distribution of an instance file");
    sub->add_option("--instances", o->instances, "instances (jsonl)")->required();
    sub->callback([o]() {
        std::vector<Instance> instances = load_instances(o->instances);
        corpus::CorpusStats s = corpus::corpus_stats(instances);
        nlohmann::ordered_json j;
        for (int g = 0; g < 2; ++g) {
            nlohmann::ordered_json gj;
            nlohmann::ordered_json counts, props;
            for (int r = 0; r < kNumRelations; ++r) {
                counts[relation_name(static_cast<Relation>(r))] = s.counts[g][r];
                props[relation_name(static_cast<Relation>(r))] = s.proportions[g][r];
            }
            gj["counts"] = counts;
            gj["proportions"] = props;
            gj["total"] = s.totals[g];
            j[gender_name(static_cast<Gender>(g))] = gj;
        }
        std::cout << j.dump(2) << "\n";
    });
}

// --- gen-synthetic -------------------------------------------------------------------

struct GenSynOpts {
    synthetic::SyntheticConfig cfg;
    std::string out;
};

void setup_gen_synthetic(CLI::App& app) {
    auto o = std::make_shared<GenSynOpts>();
    CLI::App* sub = app.add_subcommand(
        "gen-synthetic", "Generate a synthetic corpus with a planted gender-reliability bias");
    sub->add_option("--heads", o->cfg.heads, "head entities (articles); genders alternate");
    sub->add_option("--spouse-reliability-male", o->cfg.spouse_reliability_male,
                    "P(spouse trigger present | male head)");
    sub->add_option("--spouse-reliability-female", o->cfg.spouse_reliability_female,
                    "P(spouse trigger present | female head)");
    sub->add_option("--gendered-noun-p", o->cfg.gendered_noun_p,
                    "chance a filler slot becomes a gendered noun");
    sub->add_option("--filler-vocab", o->cfg.filler_vocab, "distinct filler tokens");
    sub->add_option("--seed", o->cfg.seed, "random seed");
    sub->add_option("--out", o->out, "output directory")->required();
    sub->callback([o]() {
        synthetic::SyntheticData data = synthetic::generate(o->cfg);
        std::filesystem::create_directories(o->out);
        save_articles(o->out + "/articles.jsonl", data.articles);
        save_triples(o->out + "/triples.tsv", data.triples);
        std::printf("articles %zu, triples %zu\n", data.articles.size(), data.triples.size());
    });
}

// --- run / grid ------------------------------------------------------------------------

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "embedding.dim", "embedding.window", "embedding.negatives", "embedding.epochs",
        "embedding.min_count", "embedding.lr", "embedding.subsample",
        "model.encoder", "model.selector", "model.word_dim", "model.pos_dim", "model.max_len",
        "model.max_rel_pos", "model.filters", "model.window", "model.dropout",
        "train.lr", "train.batch", "train.epochs", "train.patience",
        "run.seeds", "run.equalize", "run.debias", "run.augment",
        "split.train_ratio", "split.dev_ratio", "split.test_ratio", "split.seed",
        "split.match_mode",
    };
    return keys;
}

struct PipelineOpts {
    experiments::ExperimentConfig cfg;
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_pipeline_options(CLI::App* sub, std::shared_ptr<PipelineOpts> o) {
    sub->add_option("--config", o->config_file, "flat key=value config file");
    for (const std::string& key : config_keys()) {
        sub->add_option_function<std::string>(
            "--" + key,
            [o, key](const std::string& v) { o->overrides.emplace_back(key, v); },
            "override config key " + key);
    }
    sub->add_option("--articles", o->cfg.articles_path, "entity articles (jsonl)");
    sub->add_option("--triples", o->cfg.triples_path, "knowledge triples (jsonl)");
    sub->add_option("--instances", o->cfg.instances_path,
                    "prebuilt instances (jsonl); replaces articles+triples alignment");
    sub->add_option("--embeddings", o->cfg.embeddings_path,
                    "pretrained embeddings (text); skips SGNS training");
    sub->add_option("--lexicon", o->cfg.lexicon_path, "swap lexicon (tsv, default built-in)");
    sub->add_option("--annotations", o->cfg.annotations_path, "test-set adjudication votes (jsonl)");
    sub->add_option("--definitional-pairs", o->cfg.definitional_pairs_path,
                    "definitional pair file (default built-in)");
    sub->add_option("--equalize-pairs", o->cfg.equalize_pairs_path,
                    "equalize pair file (default built-in)");
    sub->add_option("--gendered-words", o->cfg.gendered_words_path,
                    "gender-specific word list (default built-in)");
    sub->add_option("--out", o->cfg.output_dir, "output directory");
}

experiments::ExperimentConfig resolve_pipeline_config(PipelineOpts& o) {
    if (!o.config_file.empty()) experiments::load_config_file(o.cfg, o.config_file);
    for (const auto& [key, value] : o.overrides) experiments::apply_config_kv(o.cfg, key, value);
    return o.cfg;
}

void setup_run(CLI::App& app) {
    auto o = std::make_shared<PipelineOpts>();
    CLI::App* sub = app.add_subcommand(
        "run", "Run the full pipeline for one mitigation configuration");
    add_pipeline_options(sub, o);
    sub->add_flag_function("--equalize",
                           [o](std::int64_t) { o->overrides.emplace_back("run.equalize", "true"); },
                           "shorthand for --run.equalize true");
    sub->add_flag_function("--debias",
                           [o](std::int64_t) { o->overrides.emplace_back("run.debias", "true"); },
                           "shorthand for --run.debias true");
    sub->add_flag_function("--augment",
                           [o](std::int64_t) { o->overrides.emplace_back("run.augment", "true"); },
                           "shorthand for --run.augment true");
    sub->callback([o]() {
        experiments::ExperimentConfig cfg = resolve_pipeline_config(*o);
        experiments::PipelineResult res = experiments::run_pipeline(cfg);
        print_warnings(res.warnings);
        print_report_summary(res.report);
        for (const std::string& p : res.outputs) std::fprintf(stderr, "wrote %s\n", p.c_str());
    });
}

void setup_grid(CLI::App& app) {
    auto o = std::make_shared<PipelineOpts>();
    CLI::App* sub = app.add_subcommand(
        "grid", "Run all eight equalize/debias/augment combinations and tabulate metrics");
    add_pipeline_options(sub, o);
    sub->callback([o]() {
        experiments::ExperimentConfig cfg = resolve_pipeline_config(*o);
        experiments::GridReport grid = experiments::run_grid(cfg);
        std::printf("%-5s %-6s %9s %9s %9s %9s  %s\n", "row", "flags", "eoo", "pps", "macro_f1",
                    "disparity", "error");
        for (std::size_t i = 0; i < grid.rows.size(); ++i) {
            const experiments::GridRow& r = grid.rows[i];
            std::string label = experiments::flag_label(r.equalize, r.debias, r.augment);
            if (r.ok)
                std::printf("%-5zu %-6s %9s %9s %9s %9s\n", i + 1, label.c_str(),
                            fmt(r.report.eoo).c_str(), fmt(r.report.pps).c_str(),
                            fmt(r.report.macro_f1).c_str(), fmt(r.report.disparity).c_str());
            else
                std::printf("%-5zu %-6s %9s %9s %9s %9s  %s\n", i + 1, label.c_str(), "-", "-", "-",
                            "-", r.error.c_str());
        }
        for (const std::string& p : grid.outputs) std::fprintf(stderr, "wrote %s\n", p.c_str());
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairnre: gender-fairness toolkit for neural relation extraction"};
    app.require_subcommand(1);
    setup_build_corpus(app);
    setup_equalize(app);
    setup_train_embeddings(app);
    setup_debias(app);
    setup_augment(app);
    setup_train(app);
    setup_predict(app);
    setup_evaluate(app);
    setup_grid(app);
    setup_kappa(app);
    setup_stats(app);
    setup_gen_synthetic(app);
    setup_run(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const fairnre::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fairnre::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
