#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcoqa/errors.hpp"
#include "xcoqa/ranking.hpp"

namespace xcoqa {

using Vec = std::vector<double>;

namespace vecmath {

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec normalized(const Vec& a) {
    const double n = norm(a);
    if (n == 0.0) throw shape_error("cannot normalize a zero vector");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / n;
    return out;
}

} // namespace vecmath

// Fixed-dimension unit-norm vector table, keyed by id.
struct EmbeddingStore {
    std::size_t dim = 0;
    std::map<std::string, Vec> vectors;
    bool normalized = true;

    void insert(const std::string& id, const Vec& v) {
        if (dim == 0) dim = v.size();
        if (v.size() != dim)
            throw parse_error("embedding \"" + id + "\" has dim " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(dim));
        if (vectors.count(id))
            throw conflict_error("duplicate embedding id \"" + id + "\"");
        if (vecmath::norm(v) == 0.0)
            throw shape_error("embedding \"" + id + "\" is a zero vector");
        vectors[id] = normalized ? vecmath::normalized(v) : v;
    }
};

// JSONL format: {"id": str, "vec": [float, ...]}
inline EmbeddingStore load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open embedding file: " + path);
    EmbeddingStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
            !j.contains("vec") || !j["vec"].is_array())
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": malformed embedding record");
        Vec v;
        for (const auto& x : j["vec"]) v.push_back(x.get<double>());
        store.insert(j["id"].get<std::string>(), v);
    }
    return store;
}

inline void save_embeddings(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open output file: " + path);
    for (const auto& [id, v] : store.vectors)
        out << nlohmann::json{{"id", id}, {"vec", v}}.dump() << '\n';
}

// ---- binary format ("EMB1"): u32 count, u32 dim, then per record
// u32-length-prefixed id + dim little-endian f32 values ------------------

inline void save_embeddings_binary(const EmbeddingStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw parse_error("cannot open output file: " + path);
    os.write("EMB1", 4);
    auto write_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        os.write(reinterpret_cast<char*>(b), 4);
    };
    write_u32(static_cast<std::uint32_t>(store.vectors.size()));
    write_u32(static_cast<std::uint32_t>(store.dim));
    for (const auto& [id, v] : store.vectors) {
        write_u32(static_cast<std::uint32_t>(id.size()));
        os.write(id.data(), static_cast<std::streamsize>(id.size()));
        for (double x : v) {
            float f = static_cast<float>(x);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            write_u32(bits);
        }
    }
}

inline EmbeddingStore load_embeddings_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("cannot open embedding file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "EMB1")
        throw parse_error("bad embedding magic in " + path);
    auto read_u32 = [&]() -> std::uint32_t {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        if (!is) throw parse_error("embedding file truncated: " + path);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    const auto count = read_u32();
    const auto dim = read_u32();
    EmbeddingStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto id_len = read_u32();
        std::string id(id_len, '\0');
        is.read(id.data(), id_len);
        if (!is) throw parse_error("embedding file truncated: " + path);
        Vec v(dim);
        for (std::uint32_t d = 0; d < dim; ++d) {
            const auto bits = read_u32();
            float f;
            std::memcpy(&f, &bits, 4);
            v[d] = f;
        }
        store.insert(id, v);
    }
    return store;
}

// ---- retrieval ---------------------------------------------------------

// Top-k by cosine similarity, descending; ties break by ascending id.
inline RankedList cosine_top_k(const EmbeddingStore& store, const Vec& query_vec,
                               std::size_t k = 100, const std::string& query_id = "") {
    if (query_vec.size() != store.dim)
        throw shape_error("query dim " + std::to_string(query_vec.size()) +
                          " does not match store dim " + std::to_string(store.dim));
    const Vec q = vecmath::normalized(query_vec);
    RankedList out;
    out.query_id = query_id;
    out.entries.reserve(store.vectors.size());
    for (const auto& [id, v] : store.vectors)
        out.entries.push_back({id, vecmath::dot(q, v)});
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const RankedEntry& a, const RankedEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.id < b.id;
                     });
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

// Average-rank fusion. A document absent from a list gets rank
// (list length + 1); output ascends by mean rank, score is -mean rank.
inline RankedList ensemble_rank(const std::vector<RankedList>& lists, std::size_t k) {
    if (lists.empty()) throw argument_error("ensemble_rank: no input lists");
    std::map<std::string, double> rank_sum;
    for (const auto& rl : lists)
        for (std::size_t pos = 0; pos < rl.entries.size(); ++pos)
            rank_sum.try_emplace(rl.entries[pos].id, 0.0);
    for (const auto& rl : lists) {
        std::map<std::string, std::size_t> pos_of;
        for (std::size_t pos = 0; pos < rl.entries.size(); ++pos)
            pos_of[rl.entries[pos].id] = pos + 1; // 1-based
        const double absent = static_cast<double>(rl.entries.size() + 1);
        for (auto& [doc, sum] : rank_sum) {
            auto it = pos_of.find(doc);
            sum += (it == pos_of.end()) ? absent : static_cast<double>(it->second);
        }
    }
    RankedList out;
    out.query_id = lists.front().query_id;
    const double n = static_cast<double>(lists.size());
    for (const auto& [doc, sum] : rank_sum)
        out.entries.push_back({doc, -(sum / n)});
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const RankedEntry& a, const RankedEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.id < b.id;
                     });
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

} // namespace xcoqa
