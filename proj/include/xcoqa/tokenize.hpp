#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xcoqa/errors.hpp"
#include "xcoqa/utf8.hpp"

namespace xcoqa {

// The 16 task languages.
inline const std::array<std::string, 16> kSupportedLangs = {
    "ar", "bn", "en", "es", "fi", "ja", "km", "ko",
    "ms", "ru", "sv", "ta", "te", "tl", "tr", "zh-cn"};

inline bool is_supported_lang(std::string_view lang) {
    return std::find(kSupportedLangs.begin(), kSupportedLangs.end(), lang) !=
           kSupportedLangs.end();
}

// Languages without whitespace word boundaries; segmented per codepoint.
inline bool is_non_spacing_lang(std::string_view lang) {
    return lang == "ja" || lang == "km" || lang == "zh-cn";
}

enum class TokenizerMode { Spacing, NonSpacing };

struct TokenizerHandle {
    std::string lang;
    TokenizerMode mode;
};

inline TokenizerHandle tokenizer_for(std::string_view lang) {
    if (!is_supported_lang(lang))
        throw config_error("unsupported language: " + std::string(lang));
    return {std::string(lang), is_non_spacing_lang(lang) ? TokenizerMode::NonSpacing
                                                         : TokenizerMode::Spacing};
}

namespace detail {

inline bool is_cjk_block(char32_t c) {
    return utf8::is_han(c) || utf8::is_kana(c) || utf8::is_khmer(c) ||
           utf8::is_hangul(c);
}

} // namespace detail

// Spacing languages: lowercase, split on whitespace/punctuation, drop
// punctuation. Non-spacing: one token per CJK/Khmer codepoint, embedded
// Latin/digit runs kept whole.
inline std::vector<std::string> tokenize(std::string_view text, std::string_view lang) {
    const TokenizerHandle h = tokenizer_for(lang);
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t c = utf8::decode(text, i);
        if (utf8::is_whitespace(c) || utf8::is_punct(c) || utf8::is_emoji(c)) {
            flush();
            continue;
        }
        if (h.mode == TokenizerMode::NonSpacing && detail::is_cjk_block(c)) {
            flush();
            std::string one;
            utf8::encode(c, one);
            tokens.push_back(one);
            continue;
        }
        utf8::encode(utf8::to_lower(c), cur);
    }
    flush();
    return tokens;
}

// Splits on sentence-terminal punctuation followed by whitespace or end.
// Terminators stay attached to their sentence; no text is dropped.
inline std::vector<std::string> split_sentences(std::string_view text,
                                                std::string_view lang) {
    tokenizer_for(lang); // validate
    std::vector<std::string> sentences;
    std::string cur;
    std::size_t i = 0;
    bool after_terminal = false;
    auto is_terminal = [](char32_t c) {
        return c == U'.' || c == U'!' || c == U'?' || c == 0x3002 ||
               c == 0xFF01 || c == 0xFF1F;
    };
    auto flush = [&] {
        // trim surrounding whitespace
        std::size_t b = cur.find_first_not_of(" \t\n\r");
        if (b == std::string::npos) {
            cur.clear();
            return;
        }
        std::size_t e = cur.find_last_not_of(" \t\n\r");
        sentences.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    while (i < text.size()) {
        const std::size_t start = i;
        const char32_t c = utf8::decode(text, i);
        if (after_terminal && !is_terminal(c)) {
            if (utf8::is_whitespace(c)) {
                flush();
                after_terminal = false;
                continue;
            }
            // full-width terminators split even without trailing space
            after_terminal = false;
        }
        cur.append(text.substr(start, i - start));
        if (is_terminal(c)) {
            if (c == 0x3002 || c == 0xFF01 || c == 0xFF1F) {
                flush();
            } else {
                after_terminal = true;
            }
        }
    }
    flush();
    return sentences;
}

// ---- language detection ------------------------------------------------

// One token per line; '#' comments and blanks ignored.
inline std::set<std::string> load_stopword_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open stopword table: " + path);
    std::set<std::string> table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        table.insert(line);
    }
    return table;
}

namespace detail {

// Compiled-in defaults for the Latin-script fallback; the on-disk tables
// (data/stopwords/*.txt) carry the same content.
inline const std::map<std::string, std::set<std::string>>& default_stopwords() {
    static const std::map<std::string, std::set<std::string>> tables = {
        {"en", {"the", "a", "an", "of", "and", "to", "in", "is", "was", "it",
                "that", "on", "for", "who", "what", "when", "where", "how",
                "did", "with", "by", "are", "as", "at", "from", "his", "her"}},
        {"es", {"el", "la", "de", "que", "y", "en", "los", "las", "se", "un",
                "una", "por", "con", "como", "para", "no", "su", "es", "fue",
                "quien", "cuando", "donde", "del", "al", "este", "esta"}},
        {"fi", {"ja", "on", "ei", "se", "että", "oli", "hän", "joka", "mikä",
                "kuka", "ovat", "mutta", "myös", "kun", "niin", "sen", "sitä",
                "tämä", "vuonna", "ole", "kanssa"}},
        {"sv", {"och", "att", "det", "som", "en", "på", "är", "av", "för",
                "med", "den", "till", "i", "han", "var", "om", "inte", "ett",
                "vem", "när", "har", "de", "vid", "från"}},
        {"tr", {"ve", "bir", "bu", "da", "de", "ne", "için", "ile", "mi",
                "kim", "daha", "çok", "gibi", "ama", "en", "olarak", "olan",
                "sonra", "kadar", "ise", "her"}},
        {"ms", {"yang", "dan", "di", "itu", "dengan", "untuk", "ini", "adalah",
                "siapa", "pada", "dalam", "ke", "dari", "tidak", "oleh",
                "juga", "akan", "telah", "bila", "apa"}},
        {"tl", {"ang", "ng", "sa", "na", "ay", "mga", "ito", "si", "ano",
                "sino", "kailan", "para", "niya", "siya", "hindi", "at",
                "kung", "ni", "po", "may"}},
    };
    return tables;
}

} // namespace detail

// Majority Unicode-script vote; Latin falls back to stopword frequency.
// Ties break by ascending language code.
inline std::string detect_language(
    std::string_view text,
    const std::set<std::string>& supported = {kSupportedLangs.begin(),
                                              kSupportedLangs.end()}) {
    if (text.empty()) throw argument_error("detect_language: empty text");

    std::map<std::string, std::size_t> script_votes; // lang -> count
    std::size_t latin = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t c = utf8::decode(text, i);
        if (utf8::is_cyrillic(c)) ++script_votes["ru"];
        else if (utf8::is_hangul(c)) ++script_votes["ko"];
        else if (utf8::is_khmer(c)) ++script_votes["km"];
        else if (utf8::is_bengali(c)) ++script_votes["bn"];
        else if (utf8::is_telugu(c)) ++script_votes["te"];
        else if (utf8::is_tamil(c)) ++script_votes["ta"];
        else if (utf8::is_arabic(c)) ++script_votes["ar"];
        else if (utf8::is_han(c)) ++script_votes["zh-cn"];
        else if (utf8::is_kana(c)) ++script_votes["ja"];
        else if (utf8::is_latin_letter(c)) ++latin;
    }
    std::string best;
    std::size_t best_votes = 0;
    // std::map iterates in code order, so ties keep the smaller code.
    for (const auto& [lang, votes] : script_votes) {
        if (!supported.count(lang)) continue;
        if (votes > best_votes) {
            best = lang;
            best_votes = votes;
        }
    }
    if (best_votes >= latin && !best.empty()) return best;

    if (latin == 0)
        throw config_error("detect_language: no script evidence in text");

    // Stopword-frequency vote over the Latin-script candidates.
    const auto tokens = tokenize(text, "en");
    std::string best_lang;
    std::size_t best_hits = 0;
    for (const auto& [lang, table] : detail::default_stopwords()) {
        if (!supported.count(lang)) continue;
        std::size_t hits = 0;
        for (const auto& t : tokens)
            if (table.count(t)) ++hits;
        if (hits > best_hits || best_lang.empty()) {
            best_lang = lang;
            best_hits = hits;
        }
    }
    if (best_lang.empty())
        throw config_error("detect_language: no Latin candidate in supported set");
    return best_lang;
}

} // namespace xcoqa
