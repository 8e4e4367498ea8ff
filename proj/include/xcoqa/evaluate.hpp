#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcoqa/errors.hpp"
#include "xcoqa/tokenize.hpp"

namespace xcoqa {

struct EvalReport {
    std::map<std::string, double> per_language;   // lang -> mean F1 in [0, 100]
    std::map<std::string, double> dataset_macro;  // dataset -> macro-average F1
    double overall = 0.0;
};

// Token-level F1 with multiset intersection; max over gold answers.
inline double token_f1(const std::string& prediction,
                       const std::vector<std::string>& golds,
                       const std::string& lang) {
    if (golds.empty()) throw argument_error("token_f1: no gold answers");
    const auto pred_tokens = tokenize(prediction, lang);
    std::map<std::string, std::size_t> pred_counts;
    for (const auto& t : pred_tokens) ++pred_counts[t];

    double best = 0.0;
    for (const auto& gold : golds) {
        const auto gold_tokens = tokenize(gold, lang);
        if (pred_tokens.empty() || gold_tokens.empty()) continue;
        std::map<std::string, std::size_t> gold_counts;
        for (const auto& t : gold_tokens) ++gold_counts[t];
        std::size_t overlap = 0;
        for (const auto& [tok, c] : gold_counts) {
            auto it = pred_counts.find(tok);
            if (it != pred_counts.end()) overlap += std::min(c, it->second);
        }
        if (overlap == 0) continue;
        const double precision = static_cast<double>(overlap) / pred_tokens.size();
        const double recall = static_cast<double>(overlap) / gold_tokens.size();
        best = std::max(best, 2.0 * precision * recall / (precision + recall));
    }
    return best;
}

// Per-language mean (x100) plus the unweighted macro over languages.
inline std::pair<std::map<std::string, double>, double> macro_average(
    const std::map<std::string, std::vector<double>>& per_question_scores) {
    if (per_question_scores.empty())
        throw argument_error("macro_average: no languages");
    std::map<std::string, double> per_language;
    double macro = 0.0;
    for (const auto& [lang, scores] : per_question_scores) {
        if (scores.empty())
            throw argument_error("macro_average: no scores for language " + lang);
        double sum = 0.0;
        for (double s : scores) sum += s;
        per_language[lang] = 100.0 * sum / static_cast<double>(scores.size());
        macro += per_language[lang];
    }
    macro /= static_cast<double>(per_language.size());
    return {per_language, macro};
}

inline double overall_score(double xor_macro, double mkqa_macro) {
    return (xor_macro + mkqa_macro) / 2.0;
}

// ---- file-based evaluation ---------------------------------------------

struct Prediction {
    std::string id;
    std::string lang;
    std::string prediction;
};

struct GoldRecord {
    std::string id;
    std::string lang;
    std::vector<std::string> answers;
};

inline std::vector<Prediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open predictions file: " + path);
    std::vector<Prediction> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("lang") ||
            !j.contains("prediction"))
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": malformed prediction record");
        out.push_back({j["id"].get<std::string>(), j["lang"].get<std::string>(),
                       j["prediction"].get<std::string>()});
    }
    return out;
}

inline std::vector<GoldRecord> load_golds(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open gold file: " + path);
    std::vector<GoldRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("lang") ||
            !j.contains("answers") || !j["answers"].is_array())
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": malformed gold record");
        GoldRecord g;
        g.id = j["id"].get<std::string>();
        g.lang = j["lang"].get<std::string>();
        for (const auto& a : j["answers"]) g.answers.push_back(a.get<std::string>());
        out.push_back(std::move(g));
    }
    return out;
}

// Scores predictions against golds and folds them into a single-dataset
// report (macro over languages, overall = that macro).
inline EvalReport evaluate_predictions(const std::vector<Prediction>& preds,
                                       const std::vector<GoldRecord>& golds,
                                       const std::string& dataset_name = "dataset") {
    std::map<std::string, const GoldRecord*> by_id;
    for (const auto& g : golds) by_id[g.id] = &g;
    std::map<std::string, std::vector<double>> scores;
    for (const auto& p : preds) {
        auto it = by_id.find(p.id);
        if (it == by_id.end())
            throw conflict_error("evaluate_predictions: no gold for id \"" + p.id + "\"");
        scores[p.lang].push_back(token_f1(p.prediction, it->second->answers, p.lang));
    }
    auto [per_language, macro] = macro_average(scores);
    EvalReport report;
    report.per_language = std::move(per_language);
    report.dataset_macro[dataset_name] = macro;
    report.overall = macro;
    return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
    return {{"per_language", r.per_language},
            {"dataset_macro", r.dataset_macro},
            {"overall", r.overall}};
}

} // namespace xcoqa
