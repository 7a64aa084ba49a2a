#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fairnre/jsonl.hpp"
#include "fairnre/pipeline.hpp"
#include "fairnre/synthetic.hpp"
#include "helpers.hpp"

using namespace fairnre;
using namespace fairnre::experiments;

namespace {

struct CorpusFiles {
    std::string articles;
    std::string triples;
};

CorpusFiles write_synthetic(const testutil::TempDir& tmp, int heads, std::uint64_t seed = 0) {
    synthetic::SyntheticConfig sc;
    sc.heads = heads;
    sc.seed = seed;
    synthetic::SyntheticData data = synthetic::generate(sc);
    CorpusFiles files{tmp / "articles.jsonl", tmp / "triples.tsv"};
    save_articles(files.articles, data.articles);
    save_triples(files.triples, data.triples);
    return files;
}

// Small but trainable end-to-end configuration (tens of milliseconds).
ExperimentConfig tiny_experiment(const CorpusFiles& files, const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.articles_path = files.articles;
    cfg.triples_path = files.triples;
    cfg.output_dir = out_dir;
    cfg.seeds = {0, 1};
    cfg.sgns.dim = 16;
    cfg.sgns.epochs = 2;
    cfg.sgns.window = 3;
    cfg.sgns.negatives = 3;
    cfg.min_count = 2;
    cfg.model.encoder = model::Encoder::cnn;
    cfg.model.selector = model::Selector::ave;
    cfg.model.word_dim = 16;
    cfg.model.pos_dim = 3;
    cfg.model.max_len = 16;
    cfg.model.max_rel_pos = 8;
    cfg.model.n_filters = 16;
    cfg.model.conv_window = 3;
    cfg.model.dropout_p = 0.0;
    cfg.model.batch_size = 32;
    cfg.model.max_epochs = 6;
    cfg.model.patience = 6;
    return cfg;
}

int count_data_lines(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++n;
    return n;
}

}  // namespace

TEST_CASE("apply_config_kv parses every key family and rejects bad input") {
    ExperimentConfig c;
    apply_config_kv(c, "embedding.dim", "32");
    apply_config_kv(c, "embedding.lr", "0.01");
    apply_config_kv(c, "model.encoder", "pcnn");
    apply_config_kv(c, "model.selector", "ave");
    apply_config_kv(c, "model.filters", "64");
    apply_config_kv(c, "train.lr", "0.25");
    apply_config_kv(c, "train.patience", "4");
    apply_config_kv(c, "run.seeds", "3, 1,4");
    apply_config_kv(c, "run.debias", "true");
    apply_config_kv(c, "split.train_ratio", "0.8");
    apply_config_kv(c, "split.match_mode", "full");

    CHECK(c.sgns.dim == 32);
    CHECK(c.sgns.initial_lr == 0.01);
    CHECK(c.model.encoder == model::Encoder::pcnn);
    CHECK(c.model.selector == model::Selector::ave);
    CHECK(c.model.n_filters == 64);
    CHECK(c.model.lr == 0.25);
    CHECK(c.model.patience == 4);
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 1, 4});
    CHECK(c.debias);
    CHECK(c.train_ratio == 0.8);
    CHECK(c.match_mode == corpus::MatchMode::full);

    CHECK_THROWS_AS(apply_config_kv(c, "no.such.key", "1"), ConfigError);
    CHECK_THROWS_AS(apply_config_kv(c, "embedding.dim", "abc"), ConfigError);
    CHECK_THROWS_AS(apply_config_kv(c, "embedding.dim", "12x"), ConfigError);
    CHECK_THROWS_AS(apply_config_kv(c, "model.dropout", "half"), ConfigError);
    CHECK_THROWS_AS(apply_config_kv(c, "run.debias", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_config_kv(c, "run.seeds", " , "), ConfigError);
    CHECK_THROWS_AS(apply_config_kv(c, "model.encoder", "rnn"), ConfigError);
}

TEST_CASE("load_config_file reads key=value lines with comments") {
    testutil::TempDir tmp("configfile");
    std::string path = tmp / "exp.conf";
    testutil::spit(path,
                   "# experiment\n"
                   "\n"
                   "embedding.dim = 24\n"
                   "model.word_dim=24\n"
                   "  train.epochs = 12  \n"
                   "run.seeds = 7,8\n");
    ExperimentConfig c;
    load_config_file(c, path);
    CHECK(c.sgns.dim == 24);
    CHECK(c.model.word_dim == 24);
    CHECK(c.model.max_epochs == 12);
    CHECK(c.seeds == std::vector<std::uint64_t>{7, 8});
    CHECK(c.config_path == path);

    testutil::spit(tmp / "bad.conf", "embedding.dim\n");
    ExperimentConfig d;
    try {
        load_config_file(d, tmp / "bad.conf");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":1:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config_file(d, tmp / "missing.conf"), DataError);
}

TEST_CASE("experiment validation catches inconsistent configs") {
    testutil::TempDir tmp("expvalidate");
    CorpusFiles files = write_synthetic(tmp, 4);
    ExperimentConfig c = tiny_experiment(files, "");

    ExperimentConfig bad = c;
    bad.seeds = {1, 2, 1};
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.seeds.clear();
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.sgns.dim = 20;  // != model.word_dim and no embeddings file
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad.embeddings_path = "whatever.txt";  // now the SGNS dim is unused
    CHECK_NOTHROW(validate(bad));
    bad = c;
    bad.min_count = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.articles_path.clear();
    CHECK_THROWS_AS(validate(bad), ConfigError);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("flag_label spells the mitigation combos") {
    CHECK(flag_label(false, false, false) == "none");
    CHECK(flag_label(true, false, false) == "E");
    CHECK(flag_label(false, true, false) == "D");
    CHECK(flag_label(false, false, true) == "A");
    CHECK(flag_label(true, true, false) == "E+D");
    CHECK(flag_label(true, false, true) == "E+A");
    CHECK(flag_label(false, true, true) == "D+A");
    CHECK(flag_label(true, true, true) == "E+D+A");
}

TEST_CASE("the synthetic generator is deterministic and shaped as configured") {
    synthetic::SyntheticConfig sc;
    sc.heads = 10;
    synthetic::SyntheticData a = synthetic::generate(sc);
    CHECK(a.articles.size() == 10);
    CHECK(a.triples.size() == 60);  // six triples per head
    CHECK(a.articles[0].entity_id == "e0");
    CHECK(a.articles[0].name == "Adam0");
    CHECK(a.articles[0].gender == Gender::male);
    CHECK(a.articles[1].name == "Anna1");
    CHECK(a.articles[1].gender == Gender::female);

    synthetic::SyntheticData b = synthetic::generate(sc);
    REQUIRE(b.articles.size() == a.articles.size());
    for (std::size_t i = 0; i < a.articles.size(); ++i) CHECK(a.articles[i].text == b.articles[i].text);

    sc.seed = 1;
    synthetic::SyntheticData c = synthetic::generate(sc);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.articles.size(); ++i) any_diff |= a.articles[i].text != c.articles[i].text;
    CHECK(any_diff);

    sc.heads = 1;
    CHECK_THROWS_AS(synthetic::generate(sc), ConfigError);
    sc.heads = 4;
    sc.spouse_reliability_male = 1.5;
    CHECK_THROWS_AS(synthetic::generate(sc), ConfigError);
    sc.spouse_reliability_male = 0.9;
    sc.filler_vocab = 0;
    CHECK_THROWS_AS(synthetic::generate(sc), ConfigError);
}

TEST_CASE("run_pipeline writes the full report set and is byte-deterministic") {
    testutil::TempDir tmp("pipeline_run");
    CorpusFiles files = write_synthetic(tmp, 40);
    std::string out = tmp / "out";
    ExperimentConfig cfg = tiny_experiment(files, out);

    PipelineResult first = run_pipeline(cfg);
    CHECK(first.report.runs == 2);
    CHECK(first.report.macro_f1 > 0.5);  // the synthetic task is easy

    const std::vector<std::string> names = {"report.json", "report.csv", "report_plotdata.tsv",
                                            "splits_stats.json", "records_seed0.jsonl",
                                            "records_seed1.jsonl"};
    std::map<std::string, std::string> bytes;
    for (const std::string& n : names) {
        std::string path = out + "/" + n;
        INFO(path);
        REQUIRE(std::filesystem::exists(path));
        bytes[n] = testutil::slurp(path);
    }

    PipelineResult second = run_pipeline(cfg);
    for (const std::string& n : names) CHECK(bytes[n] == testutil::slurp(out + "/" + n));
    CHECK(second.report.macro_f1 == first.report.macro_f1);

    // records round-trip through the jsonl reader
    std::vector<PredictionRecord> recs = load_records(out + "/records_seed0.jsonl");
    CHECK_FALSE(recs.empty());
}

TEST_CASE("the emitted report files parse and carry provenance") {
    testutil::TempDir tmp("pipeline_report");
    CorpusFiles files = write_synthetic(tmp, 40);
    std::string out = tmp / "out";
    ExperimentConfig cfg = tiny_experiment(files, out);
    run_pipeline(cfg);

    nlohmann::json j = nlohmann::json::parse(testutil::slurp(out + "/report.json"));
    CHECK(j["flags"]["equalize"] == false);
    CHECK(j["flags"]["debias"] == false);
    CHECK(j["flags"]["augment"] == false);
    CHECK(j["report"]["runs"] == 2);
    REQUIRE(j["report"]["metrics"].contains("macro_f1"));
    CHECK(j["report"]["metrics"]["macro_f1"]["mean"].is_number());
    CHECK(j["report"]["metrics"]["macro_f1"]["stderr"].is_number());
    REQUIRE(j["report"]["metrics"].contains("spouse.female.f1"));
    CHECK(j["provenance"]["config"]["model.encoder"] == "cnn");
    CHECK(j["provenance"]["config"]["run.seeds"] == "0,1");
    REQUIRE(j["provenance"]["inputs"].contains(files.articles));
    std::string sha = j["provenance"]["inputs"][files.articles];
    CHECK(sha.size() == 40);

    // CSV: comments, a header, then one row per metric field
    std::string csv = testutil::slurp(out + "/report.csv");
    CHECK(csv.find("# model.encoder=cnn") != std::string::npos);
    CHECK(csv.find("# input " + files.articles) != std::string::npos);
    CHECK(count_data_lines(csv) == 1 + 48);
    CHECK(csv.find("metric,mean,stderr\n") != std::string::npos);

    // plot data: header plus one row per positive relation
    std::string tsv = testutil::slurp(out + "/report_plotdata.tsv");
    CHECK(count_data_lines(tsv) == 1 + kNumPositiveRelations);
    CHECK(tsv.rfind("combo\trelation\tf1_gap", 0) == 0);
    CHECK(tsv.find("none\tspouse\t") != std::string::npos);

    // split stats: all three splits with per-gender relation counts
    nlohmann::json stats = nlohmann::json::parse(testutil::slurp(out + "/splits_stats.json"));
    for (const char* split : {"train", "dev", "test"}) {
        REQUIRE(stats.contains(split));
        REQUIRE(stats[split].contains("male"));
        REQUIRE(stats[split]["male"].contains("total"));
        REQUIRE(stats[split]["male"].contains("spouse"));
    }
    long train_total = stats["train"]["male"]["total"].get<long>() +
                       stats["train"]["female"]["total"].get<long>();
    CHECK(train_total > 0);
}

TEST_CASE("a config file is hashed into the provenance") {
    testutil::TempDir tmp("pipeline_conf");
    CorpusFiles files = write_synthetic(tmp, 10);
    std::string conf = tmp / "exp.conf";
    testutil::spit(conf, "train.epochs = 2\nembedding.min_count = 1\n");

    ExperimentConfig cfg = tiny_experiment(files, tmp / "out");
    load_config_file(cfg, conf);
    cfg.seeds = {0};
    run_pipeline(cfg);

    nlohmann::json j = nlohmann::json::parse(testutil::slurp(tmp / "out" + "/report.json"));
    REQUIRE(j["provenance"]["inputs"].contains(conf));
    CHECK(j["provenance"]["config"]["train.epochs"] == "2");
}

TEST_CASE("the equalize flag balances the train split by instance counts") {
    testutil::TempDir tmp("pipeline_eq");

    // 12 male heads vs 4 female heads, three instances each
    std::vector<Instance> instances;
    Relation rels[3] = {Relation::spouse, Relation::birth_date, Relation::na};
    auto add_head = [&](const std::string& head, Gender g) {
        for (int k = 0; k < 3; ++k)
            instances.push_back(testutil::make_instance(
                head + ":s" + std::to_string(k), head, "t" + std::to_string(k), rels[k], g,
                {"the", head, "met", "t" + std::to_string(k), "quietly"}, 1, 3));
    };
    for (int i = 0; i < 12; ++i) add_head("m" + std::to_string(i), Gender::male);
    for (int i = 0; i < 4; ++i) add_head("f" + std::to_string(i), Gender::female);
    std::string inst_path = tmp / "instances.jsonl";
    save_instances(inst_path, instances);

    ExperimentConfig cfg = tiny_experiment({"", ""}, tmp / "out");
    cfg.articles_path.clear();
    cfg.triples_path.clear();
    cfg.instances_path = inst_path;
    cfg.train_ratio = 0.6;
    cfg.dev_ratio = 0.0;
    cfg.test_ratio = 0.4;
    cfg.seeds = {0};
    cfg.min_count = 1;
    cfg.sgns.epochs = 1;
    cfg.model.max_epochs = 2;

    auto train_counts = [&](bool equalize) {
        cfg.equalize = equalize;
        run_pipeline(cfg);
        nlohmann::json stats =
            nlohmann::json::parse(testutil::slurp(tmp / "out" + "/splits_stats.json"));
        return std::pair<long, long>(stats["train"]["male"]["total"].get<long>(),
                                     stats["train"]["female"]["total"].get<long>());
    };

    auto [m_raw, f_raw] = train_counts(false);
    CHECK(m_raw >= 2 * f_raw);  // the raw corpus is heavily skewed

    auto [m_eq, f_eq] = train_counts(true);
    CHECK(f_eq == f_raw);  // the minority gender is never trimmed
    CHECK(static_cast<double>(m_eq) <= 1.05 * static_cast<double>(f_eq) + 1.0 + 1e-9);
    CHECK(m_eq > 0);
}

TEST_CASE("the augment flag doubles and balances the train split") {
    testutil::TempDir tmp("pipeline_aug");
    CorpusFiles files = write_synthetic(tmp, 20);
    ExperimentConfig cfg = tiny_experiment(files, tmp / "out");
    cfg.seeds = {0};
    cfg.model.max_epochs = 2;

    auto train_counts = [&](bool augment) {
        cfg.augment = augment;
        run_pipeline(cfg);
        nlohmann::json stats =
            nlohmann::json::parse(testutil::slurp(tmp / "out" + "/splits_stats.json"));
        return std::pair<long, long>(stats["train"]["male"]["total"].get<long>(),
                                     stats["train"]["female"]["total"].get<long>());
    };

    auto [m_raw, f_raw] = train_counts(false);
    auto [m_aug, f_aug] = train_counts(true);
    CHECK(m_aug == m_raw + f_raw);  // every instance gains a flipped copy
    CHECK(f_aug == m_raw + f_raw);
}

TEST_CASE("stage failures are reported with the stage name") {
    testutil::TempDir tmp("pipeline_stage");
    CorpusFiles files = write_synthetic(tmp, 10);
    ExperimentConfig cfg = tiny_experiment(files, "");
    cfg.seeds = {0};

    SECTION("augment") {
        std::string lex = tmp / "lexicon.tsv";
        testutil::spit(lex, "he\the\n");  // self-map
        cfg.augment = true;
        cfg.lexicon_path = lex;
        try {
            run_pipeline(cfg);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).rfind("stage augment:", 0) == 0);
        }
    }

    SECTION("debias") {
        std::string pairs = tmp / "definitional.tsv";
        testutil::spit(pairs, "qqqqq\tzzzzz\n");  // never in the vocabulary
        cfg.debias = true;
        cfg.definitional_pairs_path = pairs;
        try {
            run_pipeline(cfg);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).rfind("stage debias:", 0) == 0);
        }
    }

    SECTION("load") {
        cfg.articles_path = tmp / "nonexistent.jsonl";
        try {
            run_pipeline(cfg);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).rfind("stage load:", 0) == 0);
        }
    }
}

TEST_CASE("no outputs survive a failed run") {
    testutil::TempDir tmp("pipeline_abort");
    CorpusFiles files = write_synthetic(tmp, 10);
    std::string out = tmp / "out";
    ExperimentConfig cfg = tiny_experiment(files, out);
    cfg.seeds = {0};
    cfg.debias = true;
    std::string pairs = tmp / "definitional.tsv";
    testutil::spit(pairs, "qqqqq\tzzzzz\n");
    cfg.definitional_pairs_path = pairs;

    CHECK_THROWS_AS(run_pipeline(cfg), DataError);
    CHECK_FALSE(std::filesystem::exists(out + "/report.json"));
    CHECK_FALSE(std::filesystem::exists(out + "/records_seed0.jsonl"));
}

TEST_CASE("run_grid emits all eight rows in the published order") {
    testutil::TempDir tmp("grid_ok");
    CorpusFiles files = write_synthetic(tmp, 40);
    std::string out = tmp / "grid";
    ExperimentConfig cfg = tiny_experiment(files, out);
    cfg.seeds = {0};
    cfg.model.max_epochs = 3;

    GridReport grid = run_grid(cfg);
    const char* labels[8] = {"none", "E", "D", "A", "E+D", "E+A", "D+A", "E+D+A"};
    auto order = grid_order();
    for (int i = 0; i < 8; ++i) {
        INFO("row " << i + 1);
        CHECK(grid.rows[i].ok);
        CHECK(grid.rows[i].error.empty());
        CHECK(grid.rows[i].equalize == order[i][0]);
        CHECK(grid.rows[i].debias == order[i][1]);
        CHECK(grid.rows[i].augment == order[i][2]);
        CHECK(flag_label(grid.rows[i].equalize, grid.rows[i].debias, grid.rows[i].augment) ==
              labels[i]);
        CHECK(std::filesystem::exists(out + "/row" + std::to_string(i + 1) + "/report.json"));
    }

    nlohmann::json j = nlohmann::json::parse(testutil::slurp(out + "/grid.json"));
    REQUIRE(j["rows"].size() == 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(j["rows"][i]["row"] == i + 1);
        CHECK(j["rows"][i]["label"] == labels[i]);
        CHECK(j["rows"][i]["ok"] == true);
        CHECK(j["rows"][i]["report"]["metrics"].contains("pps"));
    }

    std::string csv = testutil::slurp(out + "/grid.csv");
    CHECK(count_data_lines(csv) == 1 + 8);
    CHECK(csv.find("row,label,equalize,debias,augment,eoo,") != std::string::npos);

    // grid plot data: 8 combos x 4 relations
    std::string tsv = testutil::slurp(out + "/grid_plotdata.tsv");
    CHECK(count_data_lines(tsv) == 1 + 8 * kNumPositiveRelations);
}

TEST_CASE("grid rows fail independently") {
    testutil::TempDir tmp("grid_fail");
    CorpusFiles files = write_synthetic(tmp, 40);
    std::string out = tmp / "grid";
    ExperimentConfig cfg = tiny_experiment(files, out);
    cfg.seeds = {0};
    cfg.model.max_epochs = 2;
    std::string pairs = tmp / "definitional.tsv";
    testutil::spit(pairs, "qqqqq\tzzzzz\n");  // poisons only the debias rows
    cfg.definitional_pairs_path = pairs;

    GridReport grid = run_grid(cfg);
    auto order = grid_order();
    for (int i = 0; i < 8; ++i) {
        bool debias_row = order[i][1];
        INFO("row " << i + 1);
        CHECK(grid.rows[i].ok == !debias_row);
        if (debias_row) {
            CHECK(grid.rows[i].error.find("stage debias") != std::string::npos);
            CHECK_FALSE(
                std::filesystem::exists(out + "/row" + std::to_string(i + 1) + "/report.json"));
        } else {
            CHECK(std::filesystem::exists(out + "/row" + std::to_string(i + 1) + "/report.json"));
        }
    }

    // the grid table still carries all eight rows, with empty metric cells
    // and a semicolon-sanitized error message on the failed ones
    std::string csv = testutil::slurp(out + "/grid.csv");
    CHECK(count_data_lines(csv) == 1 + 8);
    std::istringstream in(csv);
    std::string line;
    int failed = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find("stage debias") != std::string::npos) {
            ++failed;
            CHECK(line.find(",,,,,,,,") != std::string::npos);  // empty metric cells
        }
    }
    CHECK(failed == 4);

    nlohmann::json j = nlohmann::json::parse(testutil::slurp(out + "/grid.json"));
    CHECK(j["rows"][2]["ok"] == false);
    CHECK(j["rows"][2]["error"].get<std::string>().find("stage debias") != std::string::npos);
    CHECK(j["rows"][0]["ok"] == true);
}
