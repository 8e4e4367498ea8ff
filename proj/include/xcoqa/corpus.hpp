#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcoqa/errors.hpp"
#include "xcoqa/tokenize.hpp"
#include "xcoqa/utf8.hpp"

namespace xcoqa {

struct Passage {
    std::string id;
    std::string lang;
    std::string title;
    std::string text;
};

enum class FilterLabel { Number, Who, HowMany, ContainsNumber, Date };

inline std::string to_string(FilterLabel l) {
    switch (l) {
        case FilterLabel::Number: return "Number";
        case FilterLabel::Who: return "Who";
        case FilterLabel::HowMany: return "HowMany";
        case FilterLabel::ContainsNumber: return "ContainsNumber";
        case FilterLabel::Date: return "Date";
    }
    return "?";
}

inline std::optional<FilterLabel> filter_label_from_string(const std::string& s) {
    if (s == "Number") return FilterLabel::Number;
    if (s == "Who") return FilterLabel::Who;
    if (s == "HowMany") return FilterLabel::HowMany;
    if (s == "ContainsNumber") return FilterLabel::ContainsNumber;
    if (s == "Date") return FilterLabel::Date;
    return std::nullopt;
}

struct QAPair {
    std::string id;
    std::string question;
    std::string answer;
    std::string lang;
    std::optional<FilterLabel> label;
    std::optional<std::string> source_passage_id;
};

struct SubPassage {
    std::string parent_id;
    std::size_t index = 0;
    std::string text;
    std::size_t token_count = 0;
    bool oversized = false; // single sentence above the token budget
};

// ---- JSONL I/O ---------------------------------------------------------

namespace detail {

inline nlohmann::json parse_jsonl_line(const std::string& line, std::size_t lineno,
                                       const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw parse_error(path + ":" + std::to_string(lineno) + ": malformed JSON record");
    return j;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  std::size_t lineno, const std::string& path) {
    if (!j.contains(key) || !j[key].is_string())
        throw parse_error(path + ":" + std::to_string(lineno) +
                          ": missing or non-string field \"" + key + "\"");
    return j[key].get<std::string>();
}

} // namespace detail

inline std::vector<Passage> load_passages(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open corpus file: " + path);
    std::vector<Passage> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto j = detail::parse_jsonl_line(line, lineno, path);
        Passage p;
        p.id = detail::require_string(j, "id", lineno, path);
        p.lang = detail::require_string(j, "lang", lineno, path);
        p.title = detail::require_string(j, "title", lineno, path);
        p.text = detail::require_string(j, "text", lineno, path);
        if (!seen.insert(p.id).second)
            throw conflict_error(path + ":" + std::to_string(lineno) +
                                 ": duplicate passage id \"" + p.id + "\"");
        out.push_back(std::move(p));
    }
    return out;
}

inline void save_passages(const std::vector<Passage>& passages, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open output file: " + path);
    for (const auto& p : passages) {
        nlohmann::json j{{"id", p.id}, {"lang", p.lang}, {"title", p.title}, {"text", p.text}};
        out << j.dump() << '\n';
    }
}

inline std::vector<QAPair> load_qa_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open QA file: " + path);
    std::vector<QAPair> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto j = detail::parse_jsonl_line(line, lineno, path);
        QAPair q;
        q.id = detail::require_string(j, "id", lineno, path);
        q.question = detail::require_string(j, "question", lineno, path);
        q.answer = detail::require_string(j, "answer", lineno, path);
        q.lang = detail::require_string(j, "lang", lineno, path);
        if (j.contains("label") && j["label"].is_string())
            q.label = filter_label_from_string(j["label"].get<std::string>());
        if (j.contains("source_passage_id") && j["source_passage_id"].is_string())
            q.source_passage_id = j["source_passage_id"].get<std::string>();
        out.push_back(std::move(q));
    }
    return out;
}

inline void save_qa_pairs(const std::vector<QAPair>& pairs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open output file: " + path);
    for (const auto& q : pairs) {
        nlohmann::json j{{"id", q.id}, {"question", q.question}, {"answer", q.answer},
                         {"lang", q.lang}};
        j["label"] = q.label ? nlohmann::json(to_string(*q.label)) : nlohmann::json(nullptr);
        j["source_passage_id"] =
            q.source_passage_id ? nlohmann::json(*q.source_passage_id) : nlohmann::json(nullptr);
        out << j.dump() << '\n';
    }
}

// ---- cleaning ----------------------------------------------------------

// Removes emails and URLs, strips emoji codepoints, collapses repeated
// identical punctuation, and normalizes whitespace. Idempotent.
inline std::string clean_text(const std::string& text) {
    static const std::regex email_re(
        R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,})");
    static const std::regex url_re(
        R"((https?://[^\s]+|www\.[^\s]+))");

    auto pass = [](const std::string& in) {
        std::string s = std::regex_replace(in, email_re, " ");
        s = std::regex_replace(s, url_re, " ");
        const std::u32string cps = utf8::decode_all(s);
        std::u32string out;
        out.reserve(cps.size());
        for (char32_t c : cps) {
            if (utf8::is_emoji(c)) continue;
            if (!out.empty() && out.back() == c && utf8::is_punct(c)) continue;
            if (utf8::is_whitespace(c)) {
                if (!out.empty() && out.back() != U' ') out.push_back(U' ');
            } else {
                out.push_back(c);
            }
        }
        while (!out.empty() && out.back() == U' ') out.pop_back();
        return utf8::encode_all(out);
    };

    // Removing one artifact can expose another (an emoji splitting a URL, a
    // doubled '@' hiding an email), so iterate to a fixpoint. Each changing
    // pass shrinks the string, so this terminates.
    std::string s = pass(text);
    for (std::string next = pass(s); next != s; next = pass(s)) s = std::move(next);
    return s;
}

// ---- sub-passage splitting --------------------------------------------

// Greedy accumulation of whole sentences up to max_tokens per sub-passage.
// A lone sentence above the budget becomes its own (oversized) sub-passage.
inline std::vector<SubPassage> split_into_subpassages(const Passage& p,
                                                      const TokenizerHandle& tok,
                                                      std::size_t max_tokens = 512) {
    std::vector<SubPassage> out;
    const auto sentences = split_sentences(p.text, tok.lang);
    std::string cur_text;
    std::size_t cur_tokens = 0;
    auto flush = [&] {
        if (cur_text.empty()) return;
        out.push_back({p.id, out.size(), cur_text, cur_tokens, false});
        cur_text.clear();
        cur_tokens = 0;
    };
    for (const auto& sent : sentences) {
        const std::size_t n = tokenize(sent, tok.lang).size();
        if (n > max_tokens) {
            flush();
            out.push_back({p.id, out.size(), sent, n, true});
            continue;
        }
        if (cur_tokens + n > max_tokens) flush();
        if (!cur_text.empty()) cur_text += ' ';
        cur_text += sent;
        cur_tokens += n;
    }
    flush();
    return out;
}

inline std::vector<SubPassage> first_k_subpassages(const std::vector<SubPassage>& subs,
                                                   std::size_t k = 3) {
    return {subs.begin(), subs.begin() + std::min(k, subs.size())};
}

// ---- train/val split ---------------------------------------------------

inline std::pair<std::vector<Passage>, std::vector<Passage>> train_val_split(
    const std::vector<Passage>& passages, std::size_t n_train = 7000,
    std::size_t n_val = 700, std::uint64_t seed = 0) {
    if (passages.size() < n_train + n_val)
        throw argument_error("train_val_split: need " + std::to_string(n_train + n_val) +
                             " passages, have " + std::to_string(passages.size()));
    std::vector<std::size_t> idx(passages.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::pair<std::vector<Passage>, std::vector<Passage>> result;
    result.first.reserve(n_train);
    result.second.reserve(n_val);
    for (std::size_t i = 0; i < n_train; ++i) result.first.push_back(passages[idx[i]]);
    for (std::size_t i = 0; i < n_val; ++i) result.second.push_back(passages[idx[n_train + i]]);
    return result;
}

} // namespace xcoqa
