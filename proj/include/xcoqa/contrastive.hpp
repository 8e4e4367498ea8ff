#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "xcoqa/dense.hpp"
#include "xcoqa/errors.hpp"

namespace xcoqa {

// One (question, positive, negatives) tuple.
struct ContrastiveBatch {
    Vec q;
    Vec pos;
    std::vector<Vec> negs;
};

struct MixParams {
    double lambda = 0.2;
    double tau = 0.05;
    std::size_t neg_index = 0;
};

struct LossResult {
    double value = 0.0;
    Vec grad_q;
    Vec grad_pos;
    std::vector<Vec> grad_negs;
};

namespace detail {

inline void check_batch_shapes(const ContrastiveBatch& b) {
    if (b.q.empty()) throw shape_error("contrastive batch: empty question vector");
    if (b.pos.size() != b.q.size())
        throw shape_error("contrastive batch: positive dim mismatch");
    if (b.negs.empty())
        throw argument_error("contrastive batch: at least one negative required");
    for (const auto& n : b.negs)
        if (n.size() != b.q.size())
            throw shape_error("contrastive batch: negative dim mismatch");
}

// log(sum exp(s_k)) with max shift; also fills softmax probabilities.
inline double softmax_lse(const std::vector<double>& scores, std::vector<double>& probs) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    const double lse = m + std::log(z);
    probs.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        probs[i] = std::exp(scores[i] - lse);
    return lse;
}

inline void axpy(double a, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// cos(u, v) and its gradient with respect to u.
inline double cosine(const Vec& u, const Vec& v) {
    return vecmath::dot(u, v) / (vecmath::norm(u) * vecmath::norm(v));
}

inline void add_cosine_grad_u(double coeff, const Vec& u, const Vec& v, Vec& out) {
    const double nu = vecmath::norm(u);
    const double nv = vecmath::norm(v);
    const double c = vecmath::dot(u, v) / (nu * nv);
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] += coeff * (v[i] / (nu * nv) - c * u[i] / (nu * nu));
}

} // namespace detail

// ---- mDPR loss ---------------------------------------------------------

// Negative log-softmax over dot products with the positive in the numerator.
inline LossResult mdpr_loss(const ContrastiveBatch& batch) {
    detail::check_batch_shapes(batch);
    const std::size_t n = batch.negs.size();
    std::vector<double> scores(n + 1);
    scores[0] = vecmath::dot(batch.q, batch.pos);
    for (std::size_t j = 0; j < n; ++j)
        scores[j + 1] = vecmath::dot(batch.q, batch.negs[j]);
    std::vector<double> p;
    const double lse = detail::softmax_lse(scores, p);

    LossResult r;
    r.value = lse - scores[0];
    r.grad_q.assign(batch.q.size(), 0.0);
    r.grad_pos.assign(batch.q.size(), 0.0);
    r.grad_negs.assign(n, Vec(batch.q.size(), 0.0));
    detail::axpy(p[0] - 1.0, batch.pos, r.grad_q);
    detail::axpy(p[0] - 1.0, batch.q, r.grad_pos);
    for (std::size_t j = 0; j < n; ++j) {
        detail::axpy(p[j + 1], batch.negs[j], r.grad_q);
        detail::axpy(p[j + 1], batch.q, r.grad_negs[j]);
    }
    return r;
}

inline double mdpr_value(const ContrastiveBatch& batch) { return mdpr_loss(batch).value; }

// The ratio of raw dot products as printed in some formulations. Exposed
// for inspection only; can be negative inside the log and is not used by
// any training path.
inline double mdpr_linear_ratio_value(const ContrastiveBatch& batch) {
    detail::check_batch_shapes(batch);
    double num = vecmath::dot(batch.q, batch.pos);
    double den = num;
    for (const auto& neg : batch.negs) den += vecmath::dot(batch.q, neg);
    return -std::log(num / den);
}

// ---- MixCSE ------------------------------------------------------------

// Unit-normalized convex mixture of a positive and a negative embedding.
inline Vec mix_negative(const Vec& pos, const Vec& neg, double lambda) {
    if (pos.size() != neg.size())
        throw shape_error("mix_negative: dim mismatch");
    Vec m(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
        m[i] = lambda * pos[i] + (1.0 - lambda) * neg[i];
    const double n = vecmath::norm(m);
    if (n < 1e-12)
        throw argument_error("mix_negative: degenerate (near-zero) mixture vector");
    for (auto& x : m) x /= n;
    return m;
}

namespace detail {

inline void check_unit_norm(const Vec& v, const char* what) {
    if (std::abs(vecmath::norm(v) - 1.0) > 1e-6)
        throw shape_error(std::string("mixcse_loss: ") + what + " is not unit-normalized");
}

inline std::vector<double> mixcse_cosines(const ContrastiveBatch& b, const Vec& mixed) {
    const std::size_t n = b.negs.size();
    std::vector<double> cs(n + 2);
    cs[0] = cosine(b.q, b.pos);
    for (std::size_t j = 0; j < n; ++j) cs[j + 1] = cosine(b.q, b.negs[j]);
    cs[n + 1] = cosine(b.q, mixed);
    return cs;
}

} // namespace detail

// Loss value with the mixed negative supplied as a constant vector.
inline double mixcse_value_fixed_mix(const ContrastiveBatch& batch, double tau,
                                     const Vec& mixed) {
    detail::check_batch_shapes(batch);
    if (tau <= 0.0) throw argument_error("mixcse: tau must be positive");
    auto cs = detail::mixcse_cosines(batch, mixed);
    for (auto& c : cs) c /= tau;
    std::vector<double> p;
    const double lse = detail::softmax_lse(cs, p);
    return lse - cs[0];
}

// Gradients with the mixed negative held constant. This is the stop-gradient
// contract: no contribution flows into the vectors that produced `mixed`;
// the q gradient still sees the mixed term as a constant vector.
inline LossResult mixcse_loss_fixed_mix(const ContrastiveBatch& batch, double tau,
                                        const Vec& mixed) {
    detail::check_batch_shapes(batch);
    if (tau <= 0.0) throw argument_error("mixcse: tau must be positive");
    if (mixed.size() != batch.q.size())
        throw shape_error("mixcse: mixed-negative dim mismatch");
    const std::size_t n = batch.negs.size();
    auto cs = detail::mixcse_cosines(batch, mixed);
    std::vector<double> scaled(cs);
    for (auto& c : scaled) c /= tau;
    std::vector<double> p;
    const double lse = detail::softmax_lse(scaled, p);

    LossResult r;
    r.value = lse - scaled[0];
    r.grad_q.assign(batch.q.size(), 0.0);
    r.grad_pos.assign(batch.q.size(), 0.0);
    r.grad_negs.assign(n, Vec(batch.q.size(), 0.0));
    // dL/dc_k: softmax probability over tau, minus the numerator term for c_0.
    detail::add_cosine_grad_u((p[0] - 1.0) / tau, batch.q, batch.pos, r.grad_q);
    detail::add_cosine_grad_u((p[0] - 1.0) / tau, batch.pos, batch.q, r.grad_pos);
    for (std::size_t j = 0; j < n; ++j) {
        detail::add_cosine_grad_u(p[j + 1] / tau, batch.q, batch.negs[j], r.grad_q);
        detail::add_cosine_grad_u(p[j + 1] / tau, batch.negs[j], batch.q, r.grad_negs[j]);
    }
    detail::add_cosine_grad_u(p[n + 1] / tau, batch.q, mixed, r.grad_q);
    return r;
}

inline Vec mixcse_mixed_vector(const ContrastiveBatch& batch, const MixParams& params) {
    if (params.neg_index >= batch.negs.size())
        throw argument_error("mixcse: neg_index out of range");
    if (!(params.lambda > 0.0 && params.lambda < 1.0))
        throw argument_error("mixcse: lambda must lie in (0, 1)");
    return mix_negative(batch.pos, batch.negs[params.neg_index], params.lambda);
}

inline LossResult mixcse_loss(const ContrastiveBatch& batch, const MixParams& params) {
    detail::check_batch_shapes(batch);
    detail::check_unit_norm(batch.q, "question");
    detail::check_unit_norm(batch.pos, "positive");
    for (const auto& neg : batch.negs) detail::check_unit_norm(neg, "negative");
    const Vec mixed = mixcse_mixed_vector(batch, params);
    return mixcse_loss_fixed_mix(batch, params.tau, mixed);
}

// ---- finite-difference verification ------------------------------------

// Central differences per coordinate against the analytic gradients.
// Returns the max over coordinates of |a - n| / max(1e-12, |a| + |n|).
inline double finite_diff_check(
    const std::function<double(const ContrastiveBatch&)>& value_fn,
    const ContrastiveBatch& batch, const LossResult& analytic, double epsilon = 1e-5) {
    if (epsilon <= 0.0) throw argument_error("finite_diff_check: epsilon must be positive");
    double max_rel = 0.0;
    auto check_coord = [&](ContrastiveBatch& b, double& coord, double a) {
        const double saved = coord;
        coord = saved + epsilon;
        const double up = value_fn(b);
        coord = saved - epsilon;
        const double down = value_fn(b);
        coord = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double rel = std::abs(a - numeric) /
                           std::max(1e-12, std::abs(a) + std::abs(numeric));
        max_rel = std::max(max_rel, rel);
    };
    ContrastiveBatch b = batch;
    for (std::size_t i = 0; i < b.q.size(); ++i)
        check_coord(b, b.q[i], analytic.grad_q[i]);
    for (std::size_t i = 0; i < b.pos.size(); ++i)
        check_coord(b, b.pos[i], analytic.grad_pos[i]);
    for (std::size_t j = 0; j < b.negs.size(); ++j)
        for (std::size_t i = 0; i < b.negs[j].size(); ++i)
            check_coord(b, b.negs[j][i], analytic.grad_negs[j][i]);
    return max_rel;
}

inline double finite_diff_check_mdpr(const ContrastiveBatch& batch, double epsilon = 1e-5) {
    return finite_diff_check(mdpr_value, batch, mdpr_loss(batch), epsilon);
}

// The mixed negative is computed once and frozen, so the differentiated
// function matches the stop-gradient semantics of the analytic result.
inline double finite_diff_check_mixcse(const ContrastiveBatch& batch,
                                       const MixParams& params, double epsilon = 1e-5) {
    const Vec mixed = mixcse_mixed_vector(batch, params);
    auto value_fn = [&](const ContrastiveBatch& b) {
        return mixcse_value_fixed_mix(b, params.tau, mixed);
    };
    return finite_diff_check(value_fn, batch, mixcse_loss(batch, params), epsilon);
}

// ---- random batches for gradient verification ---------------------------

// Independent uniformly random unit vectors.
inline ContrastiveBatch random_unit_batch(std::mt19937_64& rng, std::size_t dim,
                                          std::size_t n_negs) {
    std::normal_distribution<double> dist;
    auto draw = [&] {
        Vec v(dim);
        for (auto& x : v) x = dist(rng);
        return vecmath::normalized(v);
    };
    ContrastiveBatch b;
    b.q = draw();
    b.pos = draw();
    for (std::size_t j = 0; j < n_negs; ++j) b.negs.push_back(draw());
    return b;
}

// Unit vectors clustered around a shared random direction. Keeps pairwise
// cosine gaps small enough that after the 1/tau scaling in the MixCSE loss no
// softmax term underflows below what central differences can resolve; fully
// independent vectors at tau = 0.05 produce terms near exp(-40) whose true
// gradients sit under the finite-difference noise floor.
inline ContrastiveBatch clustered_unit_batch(std::mt19937_64& rng, std::size_t dim,
                                             std::size_t n_negs, double spread = 0.5) {
    std::normal_distribution<double> dist;
    Vec center(dim);
    for (auto& x : center) x = dist(rng);
    center = vecmath::normalized(center);
    const double scale = spread / std::sqrt(static_cast<double>(dim));
    auto draw = [&] {
        Vec v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = center[i] + scale * dist(rng);
        return vecmath::normalized(v);
    };
    ContrastiveBatch b;
    b.q = draw();
    b.pos = draw();
    for (std::size_t j = 0; j < n_negs; ++j) b.negs.push_back(draw());
    return b;
}

// ---- batch assembly ----------------------------------------------------

enum class NegativeSource { InBatch, Random, Explicit };

struct TrainingExample {
    std::string question_id;
    Vec q;
    std::string positive_id;
    Vec pos;
};

// Builds one ContrastiveBatch per example. In-batch mode groups examples
// into consecutive chunks of batch_size and uses the other positives in
// the chunk as negatives; a trailing singleton chunk is dropped.
inline std::vector<ContrastiveBatch> assemble_batches(
    const std::vector<TrainingExample>& examples, NegativeSource source,
    std::size_t batch_size, const EmbeddingStore* passage_pool = nullptr,
    std::size_t n_random_negs = 1,
    const std::vector<std::vector<Vec>>* explicit_negs = nullptr,
    std::uint64_t seed = 0) {
    std::vector<ContrastiveBatch> out;
    if (source == NegativeSource::InBatch) {
        if (batch_size < 2)
            throw argument_error("assemble_batches: in-batch mode needs batch_size >= 2");
        for (std::size_t start = 0; start < examples.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, examples.size());
            if (end - start < 2) break;
            for (std::size_t i = start; i < end; ++i) {
                ContrastiveBatch b;
                b.q = examples[i].q;
                b.pos = examples[i].pos;
                for (std::size_t j = start; j < end; ++j)
                    if (j != i) b.negs.push_back(examples[j].pos);
                out.push_back(std::move(b));
            }
        }
        return out;
    }
    if (source == NegativeSource::Random) {
        if (!passage_pool)
            throw argument_error("assemble_batches: random mode needs a passage pool");
        std::vector<std::string> ids;
        ids.reserve(passage_pool->vectors.size());
        for (const auto& [id, v] : passage_pool->vectors) ids.push_back(id);
        std::mt19937_64 rng(seed);
        for (const auto& ex : examples) {
            ContrastiveBatch b;
            b.q = ex.q;
            b.pos = ex.pos;
            std::vector<std::string> candidates;
            for (const auto& id : ids)
                if (id != ex.positive_id) candidates.push_back(id);
            if (candidates.size() < n_random_negs)
                throw argument_error("assemble_batches: pool too small for " +
                                     std::to_string(n_random_negs) + " negatives");
            std::shuffle(candidates.begin(), candidates.end(), rng);
            for (std::size_t j = 0; j < n_random_negs; ++j)
                b.negs.push_back(passage_pool->vectors.at(candidates[j]));
            out.push_back(std::move(b));
        }
        return out;
    }
    if (!explicit_negs || explicit_negs->size() != examples.size())
        throw argument_error("assemble_batches: explicit mode needs aligned negatives");
    for (std::size_t i = 0; i < examples.size(); ++i) {
        ContrastiveBatch b;
        b.q = examples[i].q;
        b.pos = examples[i].pos;
        b.negs = (*explicit_negs)[i];
        out.push_back(std::move(b));
    }
    return out;
}

} // namespace xcoqa
