#include <catch2/catch_amalgamated.hpp>

#include "fairnre/jsonl.hpp"
#include "fairnre/sha1.hpp"
#include "fairnre/types.hpp"
#include "helpers.hpp"

using namespace fairnre;
using testutil::TempDir;

TEST_CASE("instances survive a save/load round trip") {
    TempDir dir("io_instances");
    std::vector<Instance> in = {
        testutil::make_instance("i1", "e1", "Michelle", Relation::spouse, Gender::male,
                                {"He", "and", "Michelle", "were", "married"}, 0, 2),
        testutil::make_instance("i2", "e2", "Politician", Relation::hypernym, Gender::female,
                                {"She", "was", "a", "Politician"}, 0, 3),
    };
    save_instances(dir / "x.jsonl", in);
    std::vector<Instance> out = load_instances(dir / "x.jsonl");
    REQUIRE(out.size() == 2);
    CHECK(out[0].instance_id == "i1");
    CHECK(out[0].relation == Relation::spouse);
    CHECK(out[0].gender == Gender::male);
    CHECK(out[0].tokens == in[0].tokens);
    CHECK(out[0].head_anchor == 0);
    CHECK(out[0].tail_anchor == 2);
    CHECK(out[1].relation == Relation::hypernym);
}

TEST_CASE("triples are tab-separated with exactly three columns") {
    TempDir dir("io_triples");
    std::vector<KnowledgeTriple> in = {{"e1", "spouse", "Michelle Obama"},
                                       {"e1", "almaMater", "Harvard"}};
    save_triples(dir / "t.tsv", in);
    auto out = load_triples(dir / "t.tsv");
    REQUIRE(out.size() == 2);
    CHECK(out[0].head_id == "e1");
    CHECK(out[0].tail_surface == "Michelle Obama");
    CHECK(out[1].relation_name == "almaMater");

    testutil::spit(dir / "bad.tsv", "one\ttwo\n");
    CHECK_THROWS_AS(load_triples(dir / "bad.tsv"), DataError);
}

TEST_CASE("prediction records round trip") {
    TempDir dir("io_records");
    std::vector<PredictionRecord> in = {{"b1", Gender::female, Relation::spouse, Relation::na},
                                        {"b2", Gender::male, Relation::na, Relation::na}};
    save_records(dir / "r.jsonl", in);
    auto out = load_records(dir / "r.jsonl");
    REQUIRE(out.size() == 2);
    CHECK(out[0].gender == Gender::female);
    CHECK(out[0].gold == Relation::spouse);
    CHECK(out[0].predicted == Relation::na);
    CHECK(out[1].id == "b2");
}

TEST_CASE("word pair and word list files accept comments and both separators") {
    TempDir dir("io_pairs");
    testutil::spit(dir / "p.tsv", "# definitional pairs\nshe\the\nwoman man\n\n");
    auto pairs = load_word_pairs(dir / "p.tsv");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair<std::string, std::string>{"she", "he"});
    CHECK(pairs[1] == std::pair<std::string, std::string>{"woman", "man"});

    testutil::spit(dir / "w.txt", "# words\nking\nqueen\n");
    auto words = load_word_list(dir / "w.txt");
    CHECK(words == std::vector<std::string>{"king", "queen"});
}

TEST_CASE("annotations parse instance ids with vote lists") {
    TempDir dir("io_ann");
    testutil::spit(dir / "a.jsonl",
                   "{\"instance_id\":\"i1\",\"votes\":[\"yes\",\"no\",\"no\"]}\n"
                   "{\"instance_id\":\"i2\",\"votes\":[\"yes\",\"yes\",\"yes\"]}\n");
    auto ann = load_annotations(dir / "a.jsonl");
    REQUIRE(ann.size() == 2);
    CHECK(ann[0].first == "i1");
    CHECK(ann[0].second == std::vector<std::string>{"yes", "no", "no"});
}

TEST_CASE("missing files raise data errors") {
    CHECK_THROWS_AS(load_instances("does_not_exist.jsonl"), DataError);
    CHECK_THROWS_AS(load_triples("does_not_exist.tsv"), DataError);
    CHECK_THROWS_AS(file_blob_sha1("does_not_exist.bin"), DataError);
}

TEST_CASE("sha1 matches known vectors") {
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
          "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
    // git hash-object values
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("file_blob_sha1 equals git_blob_sha1 of the content") {
    TempDir dir("io_sha");
    testutil::spit(dir / "f.txt", "hello\n");
    CHECK(file_blob_sha1(dir / "f.txt") == "ce013625030ba8dba906f756967f9e9ca394464a");
}
