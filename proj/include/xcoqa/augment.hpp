#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcoqa/corpus.hpp"
#include "xcoqa/errors.hpp"
#include "xcoqa/tokenize.hpp"
#include "xcoqa/utf8.hpp"

namespace xcoqa {

// Injectable translation dependency; throws on failure.
using TranslatorContract =
    std::function<std::string(const std::string& text, const std::string& source,
                              const std::string& target)>;

inline TranslatorContract identity_translator() {
    return [](const std::string& text, const std::string&, const std::string&) {
        return text;
    };
}

enum class AugVariant { AugQA, AugQAP };

inline std::string to_string(AugVariant v) {
    return v == AugVariant::AugQA ? "AUG-QA" : "AUG-QAP";
}

enum class PositivePlacement { Shuffle, Top };

struct AugExample {
    QAPair qa;
    Passage positive_passage;
    std::vector<Passage> negative_passages;
    AugVariant variant = AugVariant::AugQA;
    std::size_t positive_position = 0; // 0-based slot among the top documents
};

// ---- filtering heuristics ----------------------------------------------

namespace detail {

// Entire answer parses as a number once digit-separator commas/periods
// are stripped. Unicode decimal digits count as digits.
inline bool answer_is_number(const std::string& answer) {
    const auto cps = utf8::decode_all(answer);
    std::u32string stripped;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        if ((c == U',' || c == U'.') && i > 0 && i + 1 < cps.size() &&
            utf8::is_digit(cps[i - 1]) && utf8::is_digit(cps[i + 1]))
            continue; // separator between digits
        stripped.push_back(c);
    }
    // trim surrounding whitespace
    while (!stripped.empty() && utf8::is_whitespace(stripped.front()))
        stripped.erase(stripped.begin());
    while (!stripped.empty() && utf8::is_whitespace(stripped.back()))
        stripped.pop_back();
    if (stripped.empty()) return false;
    std::size_t i = 0;
    if (stripped[0] == U'-' || stripped[0] == U'+') i = 1;
    bool any_digit = false;
    bool seen_point = false;
    for (; i < stripped.size(); ++i) {
        const char32_t c = stripped[i];
        if (utf8::is_digit(c)) {
            any_digit = true;
        } else if (c == U'.' && !seen_point) {
            seen_point = true;
        } else {
            return false;
        }
    }
    return any_digit;
}

inline bool question_starts_with(const std::string& q, const std::string& prefix) {
    const std::string lq = utf8::to_lower_copy(q);
    if (lq.size() < prefix.size()) return false;
    if (lq.compare(0, prefix.size(), prefix) != 0) return false;
    // word boundary after the prefix
    return lq.size() == prefix.size() || !std::isalnum(static_cast<unsigned char>(lq[prefix.size()]));
}

inline bool answer_contains_digit(const std::string& answer) {
    const auto cps = utf8::decode_all(answer);
    return std::any_of(cps.begin(), cps.end(), [](char32_t c) { return utf8::is_digit(c); });
}

// English month name, a digit-separator-digit pattern (d/m/y style), or a
// standalone 4-digit year token. Answers are English at filtering time.
inline bool answer_is_date(const std::string& answer) {
    static const std::vector<std::string> months = {
        "january", "february", "march", "april", "may", "june", "july",
        "august", "september", "october", "november", "december"};
    const std::string low = utf8::to_lower_copy(answer);
    std::istringstream ss(low);
    std::string word;
    while (ss >> word) {
        while (!word.empty() && utf8::is_punct(static_cast<unsigned char>(word.back())))
            word.pop_back();
        if (std::find(months.begin(), months.end(), word) != months.end()) return true;
        // exactly four digits -> year token
        if (word.size() == 4 &&
            std::all_of(word.begin(), word.end(),
                        [](char c) { return c >= '0' && c <= '9'; }))
            return true;
        // d/m/y or d-m-y or d.m.y
        std::size_t parts = 0, digits = 0;
        bool ok = !word.empty();
        for (char c : word) {
            if (c >= '0' && c <= '9') {
                ++digits;
            } else if (c == '/' || c == '-' || c == '.') {
                if (digits == 0) { ok = false; break; }
                ++parts;
                digits = 0;
            } else {
                ok = false;
                break;
            }
        }
        if (ok && parts >= 1 && digits >= 1) return true;
    }
    return false;
}

} // namespace detail

// First matching rule wins: answer is a number; question starts with
// "who"; question starts with "how many"; answer is a date; answer
// contains a digit. No match rejects the pair.
inline std::optional<FilterLabel> filter_qa_pair(const std::string& question,
                                                 const std::string& answer) {
    if (question.empty() || answer.empty())
        throw argument_error("filter_qa_pair: question and answer must be nonempty");
    if (detail::answer_is_number(answer)) return FilterLabel::Number;
    if (detail::question_starts_with(question, "who")) return FilterLabel::Who;
    if (detail::question_starts_with(question, "how many")) return FilterLabel::HowMany;
    if (detail::answer_is_date(answer)) return FilterLabel::Date;
    if (detail::answer_contains_digit(answer)) return FilterLabel::ContainsNumber;
    return std::nullopt;
}

// ---- negative-context sampling -----------------------------------------

namespace detail {

inline std::string trim_to_tokens(const std::string& text, std::size_t max_tokens) {
    std::istringstream ss(text);
    std::string word, out;
    std::size_t count = 0;
    while (count < max_tokens && ss >> word) {
        if (!out.empty()) out += ' ';
        out += word;
        ++count;
    }
    return out;
}

} // namespace detail

// Uniform sample (without replacement, seeded) of sub-passages that do not
// contain the answer after lowercase matching; each trimmed to max_tokens.
inline std::vector<Passage> sample_negative_contexts(
    const std::vector<SubPassage>& pool, const std::string& answer, std::size_t n,
    std::size_t max_tokens = 100, std::uint64_t seed = 0) {
    if (pool.empty()) throw argument_error("sample_negative_contexts: empty pool");
    const std::string needle = utf8::to_lower_copy(answer);
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Passage> out;
    for (std::size_t idx : order) {
        if (out.size() == n) break;
        const auto& sub = pool[idx];
        const std::string trimmed = detail::trim_to_tokens(sub.text, max_tokens);
        if (utf8::to_lower_copy(trimmed).find(needle) != std::string::npos) continue;
        Passage p;
        p.id = sub.parent_id + "#" + std::to_string(sub.index);
        p.lang = "en";
        p.text = trimmed;
        out.push_back(std::move(p));
    }
    if (out.size() < n)
        throw argument_error("sample_negative_contexts: only " +
                             std::to_string(out.size()) + " of " + std::to_string(n) +
                             " valid candidates available");
    return out;
}

// ---- translation -------------------------------------------------------

// One translated copy of every surviving pair per target language; a pair
// that fails for any target is dropped from all targets to keep per-language
// counts equal.
inline std::vector<QAPair> translate_pairs(const std::vector<QAPair>& pairs,
                                           const std::vector<std::string>& targets,
                                           const TranslatorContract& translator) {
    for (const auto& p : pairs)
        if (p.lang != "en")
            throw argument_error("translate_pairs: pair \"" + p.id + "\" is not English");
    struct Translated {
        std::string question, answer;
    };
    std::vector<std::map<std::string, Translated>> per_pair(pairs.size());
    std::vector<bool> ok(pairs.size(), true);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (const auto& tgt : targets) {
            try {
                per_pair[i][tgt] = {translator(pairs[i].question, "en", tgt),
                                    translator(pairs[i].answer, "en", tgt)};
            } catch (const std::exception&) {
                ok[i] = false;
                break;
            }
        }
    }
    std::vector<QAPair> out;
    for (const auto& tgt : targets) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (!ok[i]) continue;
            QAPair q = pairs[i];
            q.id = pairs[i].id + "-" + tgt;
            q.lang = tgt;
            q.question = per_pair[i].at(tgt).question;
            q.answer = per_pair[i].at(tgt).answer;
            out.push_back(std::move(q));
        }
    }
    return out;
}

// ---- dataset assembly --------------------------------------------------

// AUG-QA keeps the positive passage in English; AUG-QAP translates it into
// the pair's language. Negatives come from the seed passages' leading
// sub-passages, trimmed and answer-free.
inline std::vector<AugExample> build_aug_dataset(
    const std::vector<QAPair>& pairs, const std::map<std::string, Passage>& seed_passages,
    const TranslatorContract& translator, AugVariant variant,
    std::size_t negatives_per_example, PositivePlacement placement,
    std::uint64_t seed = 0) {
    // Negative pool: first three sub-passages of every seed passage.
    std::vector<SubPassage> pool;
    const auto tok = tokenizer_for("en");
    for (const auto& [id, passage] : seed_passages) {
        auto subs = first_k_subpassages(split_into_subpassages(passage, tok), 3);
        pool.insert(pool.end(), subs.begin(), subs.end());
    }
    std::vector<AugExample> out;
    std::mt19937_64 rng(seed);
    for (const auto& pair : pairs) {
        if (!pair.source_passage_id)
            throw conflict_error("build_aug_dataset: pair \"" + pair.id +
                                 "\" has no source passage");
        auto it = seed_passages.find(*pair.source_passage_id);
        if (it == seed_passages.end())
            throw conflict_error("build_aug_dataset: missing seed passage \"" +
                                 *pair.source_passage_id + "\" for pair \"" + pair.id + "\"");
        AugExample ex;
        ex.qa = pair;
        ex.variant = variant;
        ex.positive_passage = it->second;
        if (variant == AugVariant::AugQAP) {
            try {
                ex.positive_passage.text =
                    translator(it->second.text, "en", pair.lang);
                ex.positive_passage.title =
                    translator(it->second.title, "en", pair.lang);
            } catch (const std::exception& e) {
                throw parse_error("build_aug_dataset: translation failed for pair \"" +
                                  pair.id + "\": " + e.what());
            }
            ex.positive_passage.lang = pair.lang;
        }
        ex.negative_passages = sample_negative_contexts(
            pool, pair.answer, negatives_per_example, 100, rng());
        ex.positive_position =
            placement == PositivePlacement::Top ? 0 : static_cast<std::size_t>(rng() % 3);
        out.push_back(std::move(ex));
    }
    return out;
}

inline nlohmann::json to_json(const Passage& p) {
    return {{"id", p.id}, {"lang", p.lang}, {"title", p.title}, {"text", p.text}};
}

inline nlohmann::json to_json(const AugExample& ex) {
    nlohmann::json negs = nlohmann::json::array();
    for (const auto& n : ex.negative_passages) negs.push_back(to_json(n));
    nlohmann::json qa{{"id", ex.qa.id}, {"question", ex.qa.question},
                      {"answer", ex.qa.answer}, {"lang", ex.qa.lang}};
    qa["label"] = ex.qa.label ? nlohmann::json(to_string(*ex.qa.label)) : nlohmann::json(nullptr);
    qa["source_passage_id"] = ex.qa.source_passage_id
                                  ? nlohmann::json(*ex.qa.source_passage_id)
                                  : nlohmann::json(nullptr);
    return {{"qa", qa},
            {"positive", to_json(ex.positive_passage)},
            {"negatives", negs},
            {"variant", to_string(ex.variant)},
            {"positive_position", ex.positive_position}};
}

inline void save_aug_dataset(const std::vector<AugExample>& examples,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open output file: " + path);
    for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
}

} // namespace xcoqa
