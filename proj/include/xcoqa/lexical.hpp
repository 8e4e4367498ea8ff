#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "xcoqa/corpus.hpp"
#include "xcoqa/errors.hpp"
#include "xcoqa/ranking.hpp"
#include "xcoqa/tokenize.hpp"

namespace xcoqa {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

enum class QueryMode { Question, OracleAnswer };

struct InvertedIndex {
    std::string lang;
    std::map<std::string, std::vector<std::pair<std::string, std::uint32_t>>> postings;
    std::map<std::string, std::uint32_t> doc_lengths;
    double avg_doc_length = 0.0;
    std::size_t doc_count = 0;
    Bm25Params params;
};

inline InvertedIndex build_index(const std::vector<Passage>& passages,
                                 const std::string& lang, Bm25Params params = {}) {
    if (passages.empty())
        throw argument_error("build_index: empty passage collection");
    InvertedIndex index;
    index.lang = lang;
    index.params = params;
    std::size_t total_len = 0;
    for (const auto& p : passages) {
        if (p.lang != lang)
            throw argument_error("build_index: passage \"" + p.id + "\" has lang " +
                                 p.lang + ", expected " + lang);
        if (index.doc_lengths.count(p.id))
            throw conflict_error("build_index: duplicate passage id \"" + p.id + "\"");
        const auto tokens = tokenize(p.text, lang);
        index.doc_lengths[p.id] = static_cast<std::uint32_t>(tokens.size());
        total_len += tokens.size();
        std::map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf)
            index.postings[term].emplace_back(p.id, count);
    }
    index.doc_count = passages.size();
    index.avg_doc_length = static_cast<double>(total_len) / passages.size();
    for (auto& [term, plist] : index.postings)
        std::sort(plist.begin(), plist.end());
    return index;
}

// IDF with the +1-inside-log variant; always non-negative.
inline double bm25_idf(const InvertedIndex& index, std::size_t df) {
    const double n = static_cast<double>(index.doc_count);
    const double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

inline double bm25_score(const InvertedIndex& index,
                         const std::vector<std::string>& query_tokens,
                         const std::string& passage_id) {
    auto dl_it = index.doc_lengths.find(passage_id);
    if (dl_it == index.doc_lengths.end())
        throw argument_error("bm25_score: unknown passage id \"" + passage_id + "\"");
    const double dl = dl_it->second;
    const double k1 = index.params.k1;
    const double b = index.params.b;
    const double norm = k1 * (1.0 - b + b * dl / index.avg_doc_length);
    double score = 0.0;
    for (const auto& term : query_tokens) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const auto& plist = it->second;
        auto pit = std::lower_bound(plist.begin(), plist.end(),
                                    std::pair<std::string, std::uint32_t>{passage_id, 0});
        if (pit == plist.end() || pit->first != passage_id) continue;
        const double tf = pit->second;
        score += bm25_idf(index, plist.size()) * tf * (k1 + 1.0) / (tf + norm);
    }
    return score;
}

// Top-k by BM25 over the accumulated postings. Mode only records how the
// query text was formed: oracle mode is the answer-as-query construction
// used at training time.
inline RankedList query(const InvertedIndex& index, const std::string& text,
                        QueryMode mode = QueryMode::Question, std::size_t k = 100,
                        const std::string& query_id = "") {
    (void)mode;
    if (k < 1) throw argument_error("query: k must be >= 1");
    RankedList out;
    out.query_id = query_id;
    const auto tokens = tokenize(text, index.lang);
    if (tokens.empty()) return out;

    std::map<std::string, std::uint32_t> qtf;
    for (const auto& t : tokens) ++qtf[t];
    std::map<std::string, double> scores;
    for (const auto& [term, count] : qtf) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const double idf = bm25_idf(index, it->second.size());
        for (const auto& [doc, tf] : it->second) {
            const double dl = index.doc_lengths.at(doc);
            const double norm = index.params.k1 *
                (1.0 - index.params.b + index.params.b * dl / index.avg_doc_length);
            scores[doc] += count * idf * tf * (index.params.k1 + 1.0) / (tf + norm);
        }
    }
    out.entries.reserve(scores.size());
    for (const auto& [doc, s] : scores) out.entries.push_back({doc, s});
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const RankedEntry& a, const RankedEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.id < b.id;
                     });
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

// ---- binary persistence ("BMI1") --------------------------------------

namespace detail {

template <typename T>
void write_le(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::uint64_t bits;
    if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
        static_assert(sizeof(double) == 8);
        std::memcpy(&bits, &v, 8);
    } else {
        bits = static_cast<std::uint64_t>(v);
    }
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw parse_error("index file truncated");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    } else {
        return static_cast<T>(bits);
    }
}

inline void write_str(std::ostream& os, const std::string& s) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_str(std::istream& is) {
    const auto n = read_le<std::uint32_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw parse_error("index file truncated");
    return s;
}

} // namespace detail

inline void save_index(const InvertedIndex& index, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw parse_error("cannot open index file for writing: " + path);
    os.write("BMI1", 4);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(index.doc_count));
    detail::write_le<double>(os, index.avg_doc_length);
    detail::write_le<double>(os, index.params.k1);
    detail::write_le<double>(os, index.params.b);
    detail::write_str(os, index.lang);
    for (const auto& [doc, len] : index.doc_lengths) {
        detail::write_str(os, doc);
        detail::write_le<std::uint32_t>(os, len);
    }
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(index.postings.size()));
    for (const auto& [term, plist] : index.postings) {
        detail::write_str(os, term);
        detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(plist.size()));
        for (const auto& [doc, tf] : plist) {
            detail::write_str(os, doc);
            detail::write_le<std::uint32_t>(os, tf);
        }
    }
}

inline InvertedIndex load_index(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("cannot open index file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "BMI1")
        throw parse_error("bad index magic in " + path);
    InvertedIndex index;
    index.doc_count = detail::read_le<std::uint32_t>(is);
    index.avg_doc_length = detail::read_le<double>(is);
    index.params.k1 = detail::read_le<double>(is);
    index.params.b = detail::read_le<double>(is);
    index.lang = detail::read_str(is);
    for (std::size_t i = 0; i < index.doc_count; ++i) {
        auto doc = detail::read_str(is);
        index.doc_lengths[doc] = detail::read_le<std::uint32_t>(is);
    }
    const auto n_terms = detail::read_le<std::uint32_t>(is);
    for (std::size_t t = 0; t < n_terms; ++t) {
        auto term = detail::read_str(is);
        const auto n_post = detail::read_le<std::uint32_t>(is);
        auto& plist = index.postings[term];
        plist.reserve(n_post);
        for (std::size_t p = 0; p < n_post; ++p) {
            auto doc = detail::read_str(is);
            plist.emplace_back(doc, detail::read_le<std::uint32_t>(is));
        }
    }
    return index;
}

} // namespace xcoqa
