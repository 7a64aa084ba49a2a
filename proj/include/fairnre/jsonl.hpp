#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairnre/text.hpp"
#include "fairnre/types.hpp"

namespace fairnre {

namespace detail {

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

template <typename Fn>
inline void for_each_jsonl(const std::string& path, Fn&& fn) {
    std::ifstream in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        try {
            fn(j);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        out.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
        if (tab == std::string::npos) break;
        pos = tab + 1;
    }
    return out;
}

}  // namespace detail

// Articles: JSON-lines {"entity_id","name","gender","text"}.
inline std::vector<EntityArticle> load_articles(const std::string& path) {
    std::vector<EntityArticle> out;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j) {
        EntityArticle a;
        a.entity_id = j.at("entity_id").get<std::string>();
        a.name = j.at("name").get<std::string>();
        a.gender = parse_gender(j.at("gender").get<std::string>());
        a.text = j.at("text").get<std::string>();
        out.push_back(std::move(a));
    });
    return out;
}

inline void save_articles(const std::string& path, const std::vector<EntityArticle>& articles) {
    std::ofstream out = detail::open_out(path);
    for (const EntityArticle& a : articles) {
        nlohmann::ordered_json j;
        j["entity_id"] = a.entity_id;
        j["name"] = a.name;
        j["gender"] = gender_name(a.gender);
        j["text"] = a.text;
        out << j.dump() << '\n';
    }
}

// Triples: tab-separated head_id <TAB> relation_name <TAB> tail_surface.
inline std::vector<KnowledgeTriple> load_triples(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::vector<KnowledgeTriple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cols = detail::split_tabs(line);
        if (cols.size() != 3)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated columns");
        out.push_back({cols[0], cols[1], cols[2]});
    }
    return out;
}

inline void save_triples(const std::string& path, const std::vector<KnowledgeTriple>& triples) {
    std::ofstream out = detail::open_out(path);
    for (const KnowledgeTriple& t : triples)
        out << t.head_id << '\t' << t.relation_name << '\t' << t.tail_surface << '\n';
}

// Instances: the JSON-lines contract between all modules.
inline std::vector<Instance> load_instances(const std::string& path) {
    std::vector<Instance> out;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j) {
        Instance inst;
        inst.instance_id = j.at("instance_id").get<std::string>();
        inst.head_id = j.at("head_id").get<std::string>();
        inst.tail_surface = j.at("tail_surface").get<std::string>();
        inst.relation = parse_relation(j.at("relation").get<std::string>());
        inst.gender = parse_gender(j.at("gender").get<std::string>());
        inst.tokens = j.at("tokens").get<std::vector<std::string>>();
        inst.head_anchor = j.at("head_anchor").get<int>();
        inst.tail_anchor = j.at("tail_anchor").get<int>();
        if (inst.tokens.empty()) throw DataError("instance '" + inst.instance_id + "' has no tokens");
        auto n = static_cast<int>(inst.tokens.size());
        if (inst.head_anchor < 0 || inst.head_anchor >= n || inst.tail_anchor < 0 ||
            inst.tail_anchor >= n)
            throw DataError("instance '" + inst.instance_id + "' has out-of-range anchors");
        out.push_back(std::move(inst));
    });
    return out;
}

inline nlohmann::ordered_json instance_to_json(const Instance& inst) {
    nlohmann::ordered_json j;
    j["instance_id"] = inst.instance_id;
    j["head_id"] = inst.head_id;
    j["tail_surface"] = inst.tail_surface;
    j["relation"] = relation_name(inst.relation);
    j["gender"] = gender_name(inst.gender);
    j["tokens"] = inst.tokens;
    j["head_anchor"] = inst.head_anchor;
    j["tail_anchor"] = inst.tail_anchor;
    return j;
}

inline void save_instances(const std::string& path, const std::vector<Instance>& instances) {
    std::ofstream out = detail::open_out(path);
    for (const Instance& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

// Annotations: JSON-lines {"instance_id","votes":["yes","no","no"]}.
inline std::vector<std::pair<std::string, std::vector<std::string>>> load_annotations(
    const std::string& path) {
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j) {
        out.emplace_back(j.at("instance_id").get<std::string>(),
                         j.at("votes").get<std::vector<std::string>>());
    });
    return out;
}

// Prediction records: JSON-lines {"id","gender","gold","predicted"}.
inline std::vector<PredictionRecord> load_records(const std::string& path) {
    std::vector<PredictionRecord> out;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j) {
        PredictionRecord r;
        r.id = j.at("id").get<std::string>();
        r.gender = parse_gender(j.at("gender").get<std::string>());
        r.gold = parse_relation(j.at("gold").get<std::string>());
        r.predicted = parse_relation(j.at("predicted").get<std::string>());
        out.push_back(std::move(r));
    });
    return out;
}

inline void save_records(const std::string& path, const std::vector<PredictionRecord>& records) {
    std::ofstream out = detail::open_out(path);
    for (const PredictionRecord& r : records) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["gender"] = gender_name(r.gender);
        j["gold"] = relation_name(r.gold);
        j["predicted"] = relation_name(r.predicted);
        out << j.dump() << '\n';
    }
}

// Word-pair files (swap lexicon, definitional/equalize pairs): one pair per
// line, tab- or space-separated. Lines starting with '#' are skipped.
inline std::vector<std::pair<std::string, std::string>> load_word_pairs(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols = detail::split_tabs(line);
        if (cols.size() == 1) {
            std::size_t sp = line.find(' ');
            if (sp == std::string::npos)
                throw DataError(path + ":" + std::to_string(lineno) + ": expected two columns");
            cols = {line.substr(0, sp), line.substr(sp + 1)};
        }
        if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": expected two non-empty columns");
        out.emplace_back(cols[0], cols[1]);
    }
    return out;
}

// Single-column word list ('#' comments allowed).
inline std::vector<std::string> load_word_list(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (const std::string& w : tokenize_whitespace(line)) out.push_back(w);
    }
    return out;
}

}  // namespace fairnre
