#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace xcoqa::utf8 {

// Decodes the codepoint starting at s[i]; advances i past it.
// Malformed bytes decode as U+FFFD one byte at a time.
inline char32_t decode(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const auto bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::u32string decode_all(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) out.push_back(decode(s, i));
    return out;
}

inline std::string encode_all(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size() * 3);
    for (char32_t cp : cps) encode(cp, out);
    return out;
}

// ---- script / class predicates ----------------------------------------

inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_digit(char32_t c) {
    // ASCII plus the decimal-digit blocks of the supported scripts.
    return is_ascii_digit(c) ||
           (c >= 0x0660 && c <= 0x0669) ||   // Arabic-Indic
           (c >= 0x06F0 && c <= 0x06F9) ||   // extended Arabic-Indic
           (c >= 0x0966 && c <= 0x096F) ||   // Devanagari
           (c >= 0x09E6 && c <= 0x09EF) ||   // Bengali
           (c >= 0x0BE6 && c <= 0x0BEF) ||   // Tamil
           (c >= 0x0C66 && c <= 0x0C6F) ||   // Telugu
           (c >= 0x17E0 && c <= 0x17E9) ||   // Khmer
           (c >= 0xFF10 && c <= 0xFF19);     // fullwidth
}

inline bool is_han(char32_t c) {
    return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
           (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x20000 && c <= 0x2A6DF);
}

inline bool is_kana(char32_t c) {
    return (c >= 0x3040 && c <= 0x309F) || (c >= 0x30A0 && c <= 0x30FF) ||
           (c >= 0x31F0 && c <= 0x31FF) || c == 0x30FC;
}

inline bool is_hangul(char32_t c) {
    return (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0x1100 && c <= 0x11FF) ||
           (c >= 0x3130 && c <= 0x318F);
}

inline bool is_khmer(char32_t c) { return c >= 0x1780 && c <= 0x17FF; }
inline bool is_cyrillic(char32_t c) { return c >= 0x0400 && c <= 0x04FF; }
inline bool is_bengali(char32_t c) { return c >= 0x0980 && c <= 0x09FF; }
inline bool is_telugu(char32_t c) { return c >= 0x0C00 && c <= 0x0C7F; }
inline bool is_tamil(char32_t c) { return c >= 0x0B80 && c <= 0x0BFF; }

inline bool is_arabic(char32_t c) {
    return (c >= 0x0600 && c <= 0x06FF) || (c >= 0x0750 && c <= 0x077F) ||
           (c >= 0xFB50 && c <= 0xFDFF) || (c >= 0xFE70 && c <= 0xFEFF);
}

inline bool is_latin_letter(char32_t c) {
    return (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') ||
           (c >= 0x00C0 && c <= 0x024F && c != 0x00D7 && c != 0x00F7) ||
           (c >= 0x1E00 && c <= 0x1EFF);
}

inline bool is_whitespace(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
           c == U'\v' || c == 0x00A0 || (c >= 0x2000 && c <= 0x200B) || c == 0x3000;
}

inline bool is_emoji(char32_t c) {
    return (c >= 0x1F000 && c <= 0x1FAFF) ||  // emoji, symbols, pictographs
           (c >= 0x2600 && c <= 0x27BF) ||    // misc symbols, dingbats
           (c >= 0x2B00 && c <= 0x2BFF) ||
           (c >= 0xFE00 && c <= 0xFE0F) ||    // variation selectors
           c == 0x200D;                       // zero-width joiner
}

inline bool is_punct(char32_t c) {
    if (c < 0x80)
        return !is_ascii_digit(c) && !(c >= U'A' && c <= U'Z') &&
               !(c >= U'a' && c <= U'z') && !is_whitespace(c) && c >= 0x21;
    return (c >= 0x2010 && c <= 0x205E) ||                  // general punctuation
           (c >= 0x3001 && c <= 0x303F) ||                  // CJK punctuation
           (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
           (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65) ||
           c == 0x00A1 || c == 0x00BF ||                    // inverted ! ?
           c == 0x060C || c == 0x061B || c == 0x061F ||     // Arabic , ; ?
           c == 0x0964 || c == 0x0965 ||                    // danda
           c == 0x00AB || c == 0x00BB ||
           c == 0x17D4 || c == 0x17D5 || c == 0x17D6;       // Khmer khan
}

// Case folding for the cased scripts we handle (Latin, Cyrillic, Greek).
inline char32_t to_lower(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
    if (c >= 0x0410 && c <= 0x042F) return c + 32;            // Cyrillic А-Я
    if (c >= 0x0400 && c <= 0x040F) return c + 80;            // Ѐ-Џ
    if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 32;
    if (c >= 0x0100 && c <= 0x017F) return (c % 2 == 0) ? c + 1 : c;
    return c;
}

inline std::string to_lower_copy(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) encode(to_lower(decode(s, i)), out);
    return out;
}

} // namespace xcoqa::utf8
