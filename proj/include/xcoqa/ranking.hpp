#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcoqa/errors.hpp"

namespace xcoqa {

struct RankedEntry {
    std::string id;
    double score = 0.0;
};

// Scores non-increasing, ids distinct, length <= requested k.
struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;
};

inline void save_ranked_lists(const std::vector<RankedList>& lists,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open output file: " + path);
    for (const auto& rl : lists) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : rl.entries)
            entries.push_back({{"id", e.id}, {"score", e.score}});
        out << nlohmann::json{{"query_id", rl.query_id}, {"entries", entries}}.dump()
            << '\n';
    }
}

inline std::vector<RankedList> load_ranked_lists(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open ranked-list file: " + path);
    std::vector<RankedList> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("query_id") ||
            !j.contains("entries") || !j["entries"].is_array())
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": malformed ranked-list record");
        RankedList rl;
        rl.query_id = j["query_id"].get<std::string>();
        for (const auto& e : j["entries"])
            rl.entries.push_back({e.at("id").get<std::string>(),
                                  e.at("score").get<double>()});
        out.push_back(std::move(rl));
    }
    return out;
}

} // namespace xcoqa
