#include <doctest.h>

#include <cmath>
#include <random>

#include "xcoqa/contrastive.hpp"

using namespace xcoqa;

TEST_CASE("mdpr_loss symmetric values") {
    // identical vectors make every dot product equal
    const Vec v{1.0, 0.0};
    for (std::size_t n : {1u, 3u}) {
        ContrastiveBatch b{v, v, std::vector<Vec>(n, v)};
        CHECK(mdpr_loss(b).value ==
              doctest::Approx(std::log(static_cast<double>(n) + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("mdpr_loss validation") {
    CHECK_THROWS_AS(mdpr_loss({{1, 0}, {1, 0}, {}}), argument_error);
    CHECK_THROWS_AS(mdpr_loss({{1, 0}, {1, 0, 0}, {{1, 0}}}), shape_error);
}

TEST_CASE("mdpr gradients match finite differences") {
    std::mt19937_64 rng(101);
    for (int it = 0; it < 50; ++it) {
        auto b = random_unit_batch(rng, 2 + rng() % 7, 1 + rng() % 4);
        CHECK(finite_diff_check_mdpr(b) <= 1e-5);
    }
}

TEST_CASE("mdpr value is shift-invariant in the dot products") {
    std::mt19937_64 rng(13);
    for (int it = 0; it < 20; ++it) {
        auto b = random_unit_batch(rng, 4, 3);
        // appended coordinate shifts every dot product by c
        const double c = -1.5 + 0.1 * static_cast<double>(it);
        ContrastiveBatch shifted;
        shifted.q = b.q;
        shifted.q.push_back(1.0);
        shifted.pos = b.pos;
        shifted.pos.push_back(c);
        for (const auto& neg : b.negs) {
            auto n2 = neg;
            n2.push_back(c);
            shifted.negs.push_back(n2);
        }
        CHECK(mdpr_loss(shifted).value ==
              doctest::Approx(mdpr_loss(b).value).epsilon(1e-10));
    }
}

TEST_CASE("loss monotonicity in the positive and negative similarities") {
    // raising <q,pos> with negatives fixed lowers the loss; raising a
    // negative similarity raises it
    ContrastiveBatch base{{1, 0, 0}, {0.5, 0.5, 0}, {{0, 0, 1}}};
    double prev = mdpr_loss(base).value;
    for (double step : {0.1, 0.2, 0.3}) {
        ContrastiveBatch b = base;
        b.pos[0] += step;
        const double v = mdpr_loss(b).value;
        CHECK(v < prev);
        prev = v;
    }
    prev = mdpr_loss(base).value;
    for (double step : {0.1, 0.2, 0.3}) {
        ContrastiveBatch b = base;
        b.negs[0][0] += step;
        CHECK(mdpr_loss(b).value > prev);
    }
}

TEST_CASE("mix_negative") {
    SUBCASE("mixture of a vector with itself is the vector") {
        const Vec v{0.6, 0.8};
        auto m = mix_negative(v, v, 0.2);
        CHECK(m[0] == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(m[1] == doctest::Approx(0.8).epsilon(1e-12));
    }
    SUBCASE("hand-evaluated two-dimensional case") {
        auto m = mix_negative({1, 0}, {0, 1}, 0.2);
        CHECK(m[0] == doctest::Approx(0.2 / std::sqrt(0.68)).epsilon(1e-12));
        CHECK(m[1] == doctest::Approx(0.8 / std::sqrt(0.68)).epsilon(1e-12));
    }
    SUBCASE("antipodal negative renormalizes to the dominant side") {
        auto m = mix_negative({1, 0}, {-1, 0}, 0.2);
        CHECK(m[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(m[1] == doctest::Approx(0.0));
    }
    SUBCASE("unit norm over random draws") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> dist;
        std::uniform_real_distribution<double> lam(0.01, 0.99);
        for (int it = 0; it < 500; ++it) {
            Vec pos(5), neg(5);
            for (auto& x : pos) x = dist(rng);
            for (auto& x : neg) x = dist(rng);
            pos = vecmath::normalized(pos);
            neg = vecmath::normalized(neg);
            auto m = mix_negative(pos, neg, lam(rng));
            CHECK(std::abs(vecmath::norm(m) - 1.0) <= 1e-9);
        }
    }
    SUBCASE("degenerate mixture rejected") {
        CHECK_THROWS_AS(mix_negative({1, 0}, {-1, 0}, 0.5), argument_error);
    }
}

TEST_CASE("mixcse_loss values") {
    SUBCASE("q = pos with an orthogonal negative") {
        const Vec q{1, 0};
        ContrastiveBatch b{q, q, {{0, 1}}};
        MixParams params{0.2, 0.05, 0};
        // direct scalar evaluation of the closed form
        const double cm = 0.2 / std::sqrt(0.68);
        const double expected =
            std::log(1.0 + std::exp((0.0 - 1.0) / 0.05) + std::exp((cm - 1.0) / 0.05));
        const double v = mixcse_loss(b, params).value;
        CHECK(v == doctest::Approx(expected).epsilon(1e-9));
        CHECK(v > 1e-7);
        CHECK(v < 1e-6);
    }
    SUBCASE("three-way symmetric case gives ln 3") {
        // q orthogonal to pos, neg, and hence to the mixture
        ContrastiveBatch b{{0, 0, 1}, {1, 0, 0}, {{0, 1, 0}}};
        MixParams params{0.2, 0.05, 0};
        CHECK(mixcse_loss(b, params).value ==
              doctest::Approx(std::log(3.0)).epsilon(1e-12));
    }
    SUBCASE("non-normalized input rejected") {
        ContrastiveBatch b{{2, 0}, {1, 0}, {{0, 1}}};
        CHECK_THROWS_AS(mixcse_loss(b, MixParams{}), shape_error);
    }
    SUBCASE("bad params rejected") {
        ContrastiveBatch b{{1, 0}, {0, 1}, {{1, 0}}};
        CHECK_THROWS_AS(mixcse_loss(b, MixParams{1.5, 0.05, 0}), argument_error);
        CHECK_THROWS_AS(mixcse_loss(b, MixParams{0.2, -1.0, 0}), argument_error);
        CHECK_THROWS_AS(mixcse_loss(b, MixParams{0.2, 0.05, 5}), argument_error);
    }
}

TEST_CASE("mixcse gradients match finite differences with frozen mixture") {
    std::mt19937_64 rng(202);
    for (int it = 0; it < 50; ++it) {
        const std::size_t n = 1 + rng() % 4;
        // clustered batches keep every softmax term above the
        // finite-difference noise floor at tau = 0.05
        auto b = clustered_unit_batch(rng, 2 + rng() % 7, n);
        MixParams params{0.2, 0.05, rng() % n};
        CHECK(finite_diff_check_mixcse(b, params) <= 1e-5);
    }
}

TEST_CASE("stop-gradient exactness") {
    std::mt19937_64 rng(303);
    for (int it = 0; it < 30; ++it) {
        const std::size_t n = 1 + rng() % 4;
        auto b = random_unit_batch(rng, 6, n);
        MixParams params{0.2, 0.05, rng() % n};
        auto full = mixcse_loss(b, params);
        const Vec mixed = mixcse_mixed_vector(b, params);
        auto frozen = mixcse_loss_fixed_mix(b, params.tau, mixed);
        CHECK(full.value == frozen.value);
        CHECK(full.grad_pos == frozen.grad_pos);
        CHECK(full.grad_negs == frozen.grad_negs);
        CHECK(full.grad_q == frozen.grad_q);
    }
}

TEST_CASE("losses stay finite across the cosine range") {
    for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const double s = std::sqrt(1.0 - c * c);
        ContrastiveBatch b{{1, 0, 0}, {c, s, 0}, {{c, -s, 0}, {0, 0, 1}}};
        MixParams params{0.2, 1e-3, 0};
        CHECK(std::isfinite(mixcse_loss(b, params).value));
        CHECK(std::isfinite(mdpr_loss(b).value));
    }
}

TEST_CASE("finite_diff_check harness") {
    SUBCASE("quadratic with known gradient") {
        // f = <q,q> on the q block; pos/negs unused but present
        auto value_fn = [](const ContrastiveBatch& b) {
            return vecmath::dot(b.q, b.q);
        };
        ContrastiveBatch b{{0.3, -0.7, 1.1}, {0, 0, 0}, {{0, 0, 0}}};
        LossResult analytic;
        analytic.value = vecmath::dot(b.q, b.q);
        analytic.grad_q = {2 * b.q[0], 2 * b.q[1], 2 * b.q[2]};
        analytic.grad_pos = {0, 0, 0};
        analytic.grad_negs = {{0, 0, 0}};
        CHECK(finite_diff_check(value_fn, b, analytic) <= 1e-7);
    }
    SUBCASE("zero epsilon rejected") {
        ContrastiveBatch b{{1, 0}, {0, 1}, {{1, 0}}};
        CHECK_THROWS_AS(finite_diff_check_mdpr(b, 0.0), argument_error);
    }
}

TEST_CASE("mdpr linear-ratio inspection form") {
    const Vec v{1.0, 0.0};
    ContrastiveBatch b{v, v, {v}};
    // equal dots: -log(1/2) = ln 2
    CHECK(mdpr_linear_ratio_value(b) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("assemble_batches") {
    auto make_examples = [](std::size_t n) {
        std::vector<TrainingExample> ex;
        for (std::size_t i = 0; i < n; ++i) {
            Vec q{1.0, static_cast<double>(i)};
            Vec p{static_cast<double>(i), 1.0};
            ex.push_back({"q" + std::to_string(i), vecmath::normalized(q),
                          "p" + std::to_string(i), vecmath::normalized(p)});
        }
        return ex;
    };
    SUBCASE("in-batch with batch_size 4 gives 3 negatives each") {
        auto batches = assemble_batches(make_examples(8), NegativeSource::InBatch, 4);
        REQUIRE(batches.size() == 8);
        for (const auto& b : batches) CHECK(b.negs.size() == 3);
    }
    SUBCASE("in-batch with batch_size 2 gives 1 negative each") {
        auto batches = assemble_batches(make_examples(4), NegativeSource::InBatch, 2);
        REQUIRE(batches.size() == 4);
        for (const auto& b : batches) CHECK(b.negs.size() == 1);
    }
    SUBCASE("in-batch with batch_size below 2 rejected") {
        CHECK_THROWS_AS(assemble_batches(make_examples(4), NegativeSource::InBatch, 1),
                        argument_error);
    }
    SUBCASE("random mode never samples the positive id") {
        EmbeddingStore pool;
        for (int i = 0; i < 6; ++i) {
            Vec v{1.0, static_cast<double>(i + 1)};
            pool.insert("p" + std::to_string(i), v);
        }
        auto examples = make_examples(6);
        for (int trial = 0; trial < 10; ++trial) {
            auto batches = assemble_batches(examples, NegativeSource::Random, 0, &pool, 3,
                                            nullptr, trial);
            REQUIRE(batches.size() == 6);
            for (std::size_t i = 0; i < batches.size(); ++i) {
                const auto& own = pool.vectors.at(examples[i].positive_id);
                for (const auto& neg : batches[i].negs) CHECK(neg != own);
            }
        }
    }
    SUBCASE("random mode is deterministic under seed") {
        EmbeddingStore pool;
        for (int i = 0; i < 6; ++i)
            pool.insert("p" + std::to_string(i), Vec{1.0, static_cast<double>(i + 1)});
        auto b1 = assemble_batches(make_examples(6), NegativeSource::Random, 0, &pool, 2,
                                   nullptr, 77);
        auto b2 = assemble_batches(make_examples(6), NegativeSource::Random, 0, &pool, 2,
                                   nullptr, 77);
        REQUIRE(b1.size() == b2.size());
        for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1[i].negs == b2[i].negs);
    }
}
