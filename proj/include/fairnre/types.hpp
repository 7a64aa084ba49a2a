#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairnre {

// Raised for bad user-supplied configuration (CLI exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised for malformed or inconsistent input data (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Gender { male = 0, female = 1 };

// The four positive relations plus NA. Order is the tie-break order for
// argmax predictions, lowest index wins.
enum class Relation { spouse = 0, hypernym = 1, birth_date = 2, birth_place = 3, na = 4 };

inline constexpr int kNumRelations = 5;
inline constexpr int kNumPositiveRelations = 4;

inline const char* gender_name(Gender g) { return g == Gender::male ? "male" : "female"; }

inline Gender parse_gender(const std::string& s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    throw DataError("unknown gender: '" + s + "' (expected male|female)");
}

inline Gender flip(Gender g) { return g == Gender::male ? Gender::female : Gender::male; }

inline const char* relation_name(Relation r) {
    switch (r) {
        case Relation::spouse: return "spouse";
        case Relation::hypernym: return "hypernym";
        case Relation::birth_date: return "birthDate";
        case Relation::birth_place: return "birthPlace";
        case Relation::na: return "NA";
    }
    return "NA";
}

inline Relation parse_relation(const std::string& s) {
    if (s == "spouse") return Relation::spouse;
    if (s == "hypernym") return Relation::hypernym;
    if (s == "birthDate") return Relation::birth_date;
    if (s == "birthPlace") return Relation::birth_place;
    if (s == "NA") return Relation::na;
    throw DataError("unknown relation label: '" + s + "'");
}

// Triple relation names as they appear in knowledge-triple files. The first
// four map to their positive label, the last three are negative relations
// that produce NA instances.
inline bool is_positive_triple_relation(const std::string& name) {
    return name == "spouse" || name == "hypernym" || name == "birthDate" || name == "birthPlace";
}

inline bool is_negative_triple_relation(const std::string& name) {
    return name == "parents" || name == "deathDate" || name == "almaMater";
}

inline Relation triple_relation_label(const std::string& name) {
    if (is_positive_triple_relation(name)) return parse_relation(name);
    if (is_negative_triple_relation(name)) return Relation::na;
    throw DataError("unknown triple relation name: '" + name + "'");
}

struct EntityArticle {
    std::string entity_id;
    std::string name;
    Gender gender = Gender::male;
    std::string text;
};

struct KnowledgeTriple {
    std::string head_id;
    std::string relation_name;
    std::string tail_surface;
};

// One distantly supervised sentence. `gender` is always the head article's
// gender; anchors index into `tokens`.
struct Instance {
    std::string instance_id;
    std::string head_id;
    std::string tail_surface;
    Relation relation = Relation::na;
    Gender gender = Gender::male;
    std::vector<std::string> tokens;
    int head_anchor = 0;
    int tail_anchor = 0;
};

// One bag-level prediction; the sole input of the metrics module.
struct PredictionRecord {
    std::string id;
    Gender gender = Gender::male;
    Relation gold = Relation::na;
    Relation predicted = Relation::na;
};

enum class SplitName { train = 0, dev = 1, test = 2 };

inline const char* split_name(SplitName s) {
    switch (s) {
        case SplitName::train: return "train";
        case SplitName::dev: return "dev";
        case SplitName::test: return "test";
    }
    return "train";
}

struct DatasetSplit {
    SplitName name = SplitName::train;
    std::vector<Instance> instances;
};

}  // namespace fairnre
