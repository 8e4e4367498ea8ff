#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcoqa/corpus.hpp"
#include "xcoqa/errors.hpp"
#include "xcoqa/tokenize.hpp"
#include "xcoqa/utf8.hpp"

namespace xcoqa {

struct GenerationRequest {
    std::string id;
    std::string question;
    std::string lang;
    std::vector<Passage> passages; // ordered by retrieval rank
    std::size_t max_input_tokens = 16000;
};

// Answer-generation contract; the shipped baselines are deterministic
// pure functions of the request.
using GeneratorContract = std::function<std::string(const GenerationRequest&)>;

namespace detail {

inline std::string join_tokens(const std::vector<std::string>& tokens,
                               const std::string& lang) {
    const std::string sep = is_non_spacing_lang(lang) ? "" : " ";
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += sep;
        out += tokens[i];
    }
    return out;
}

// Cuts text to its first n tokens, preserving the original token text.
inline std::string head_tokens(const std::string& text, const std::string& lang,
                               std::size_t n) {
    auto tokens = tokenize(text, lang);
    if (tokens.size() > n) tokens.resize(n);
    return join_tokens(tokens, lang);
}

} // namespace detail

// First (at most) 10 tokens of the top-ranked passage.
inline GeneratorContract echo_generator() {
    return [](const GenerationRequest& req) -> std::string {
        if (req.passages.empty()) return "";
        return detail::head_tokens(req.passages.front().text,
                                   req.passages.front().lang, 10);
    };
}

// Returns the provided gold answer if its lowercase form appears in any
// passage, else empty. Probes retrieval quality; no generation fidelity.
inline GeneratorContract oracle_extractive_generator(
    std::map<std::string, std::vector<std::string>> golds_by_request_id) {
    return [golds = std::move(golds_by_request_id)](const GenerationRequest& req) -> std::string {
        auto it = golds.find(req.id);
        if (it == golds.end()) return "";
        for (const auto& gold : it->second) {
            const std::string needle = utf8::to_lower_copy(gold);
            for (const auto& p : req.passages)
                if (utf8::to_lower_copy(p.text).find(needle) != std::string::npos)
                    return gold;
        }
        return "";
    };
}

inline std::string generate(const GenerationRequest& req, const GeneratorContract& gen) {
    try {
        return gen(req);
    } catch (const std::exception& e) {
        throw parse_error("generator failed for request \"" + req.id + "\": " + e.what());
    }
}

// Cuts the question + passage token stream at `limit` tokens; the last
// partially fitting passage is trimmed, later ones dropped.
inline GenerationRequest truncate_input(const GenerationRequest& req,
                                        std::size_t limit = 16000) {
    const std::size_t q_tokens = tokenize(req.question, req.lang).size();
    if (limit < q_tokens || limit == 0)
        throw argument_error("truncate_input: limit " + std::to_string(limit) +
                             " leaves no room for the question (" +
                             std::to_string(q_tokens) + " tokens)");
    GenerationRequest out = req;
    out.passages.clear();
    std::size_t used = q_tokens;
    for (const auto& p : req.passages) {
        if (used >= limit) break;
        const std::size_t n = tokenize(p.text, p.lang).size();
        if (used + n <= limit) {
            out.passages.push_back(p);
            used += n;
        } else {
            Passage trimmed = p;
            trimmed.text = detail::head_tokens(p.text, p.lang, limit - used);
            out.passages.push_back(trimmed);
            used = limit;
        }
    }
    return out;
}

// ---- request I/O -------------------------------------------------------

inline std::vector<GenerationRequest> load_requests(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open requests file: " + path);
    std::vector<GenerationRequest> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("question") ||
            !j.contains("lang") || !j.contains("passages") || !j["passages"].is_array())
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": malformed generation request");
        GenerationRequest r;
        r.id = j["id"].get<std::string>();
        r.question = j["question"].get<std::string>();
        r.lang = j["lang"].get<std::string>();
        for (const auto& pj : j["passages"]) {
            Passage p;
            p.id = pj.at("id").get<std::string>();
            p.lang = pj.at("lang").get<std::string>();
            p.title = pj.value("title", "");
            p.text = pj.at("text").get<std::string>();
            r.passages.push_back(std::move(p));
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline void save_requests(const std::vector<GenerationRequest>& requests,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open output file: " + path);
    for (const auto& r : requests) {
        nlohmann::json passages = nlohmann::json::array();
        for (const auto& p : r.passages)
            passages.push_back({{"id", p.id}, {"lang", p.lang}, {"title", p.title},
                                {"text", p.text}});
        out << nlohmann::json{{"id", r.id}, {"question", r.question},
                              {"lang", r.lang}, {"passages", passages}}.dump()
            << '\n';
    }
}

} // namespace xcoqa
