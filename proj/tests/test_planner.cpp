#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "racecms/planner.hpp"
#include "racecms/rng.hpp"

using namespace racecms;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("power selection on hand-checked inputs", "[planner]") {
    REQUIRE(planner::choose_k(100.0, 0.5) == 14); // ceil(2 ln 100 / ln 2)
    REQUIRE(planner::choose_k(8.0, 0.25) == 3);   // boundary: 0.25^(-3/2) = 8 exactly
    REQUIRE(planner::choose_k(8.0001, 0.25) == 4);
    REQUIRE(planner::choose_k(1.0, 0.9) == 1);
    REQUIRE(planner::choose_k(1.0, 0.0001) == 1);
    REQUIRE_THROWS_AS(planner::choose_k(0.5, 0.5), DomainError);
    REQUIRE_THROWS_AS(planner::choose_k(10.0, 0.0), DomainError);
    REQUIRE_THROWS_AS(planner::choose_k(10.0, 1.0), DomainError);
}

TEST_CASE("chosen power is the smallest satisfying the tail inequality", "[planner]") {
    Rng rng(606);
    for (int t = 0; t < 500; ++t) {
        double B = 1.0 + rng.uniform01() * 1e6;
        double delta = 0.01 + rng.uniform01() * 0.97;
        std::uint32_t K = planner::choose_k(B, delta);
        REQUIRE(K >= 1);
        REQUIRE(std::pow(delta, -0.5 * double(K)) >= B);
        if (K > 1) REQUIRE(std::pow(delta, -0.5 * double(K - 1)) < B);
    }
}

TEST_CASE("resolution gap arithmetic", "[planner]") {
    REQUIRE_THAT(planner::resolution_epsilon(0.9, 0.5, 1.0), WithinAbs(0.45, 1e-15));
    REQUIRE_THAT(planner::resolution_epsilon(0.9, 0.5, 2.0), WithinAbs(0.6075, 1e-15));
    double k = 1.5; // fractional powers are part of the contract
    REQUIRE_THAT(planner::resolution_epsilon(0.8, 0.4, k),
                 WithinAbs(std::pow(0.8, k) * (1.0 - std::pow(0.4, k)), 1e-15));
    REQUIRE_THROWS_AS(planner::resolution_epsilon(0.0, 0.5, 1.0), DomainError);
    REQUIRE_THROWS_AS(planner::resolution_epsilon(0.9, 1.0, 1.0), DomainError);
    REQUIRE_THROWS_AS(planner::resolution_epsilon(0.9, 0.5, 0.5), DomainError);
}

TEST_CASE("repetition count on hand-checked inputs", "[planner]") {
    REQUIRE(planner::reps_needed(1.0, 1.0, std::exp(-1.0), 1) == 32);
    REQUIRE(planner::reps_needed(4.0, 0.5, 0.01, 100) == 4716);
    REQUIRE(planner::reps_needed(1.0, 0.25, 0.05, 10) >
            planner::reps_needed(1.0, 0.5, 0.05, 10)); // tighter tolerance costs more
    REQUIRE_THROWS_AS(planner::reps_needed(0.0, 1.0, 0.5, 1), DomainError);
    REQUIRE_THROWS_AS(planner::reps_needed(1.0, 0.0, 0.5, 1), DomainError);
    REQUIRE_THROWS_AS(planner::reps_needed(1.0, 1.0, 0.5, 0), DomainError);
}

TEST_CASE("grid dimensions on hand-checked inputs", "[planner]") {
    planner::CmsDimensions dims = planner::cms_dimensions(2.0, 0.1, 0.01, 1000000);
    REQUIRE(dims.d == 19); // ceil(ln 1e8)
    REQUIRE(dims.w == 218); // ceil(4e * 2 / 0.1)
    REQUIRE_THROWS_AS(planner::cms_dimensions(0.0, 0.1, 0.01, 10), DomainError);
    REQUIRE_THROWS_AS(planner::cms_dimensions(1.0, 0.1, 0.01, 0), DomainError);
}

TEST_CASE("memory exponent values and regimes", "[planner]") {
    planner::MemoryExponent exp = planner::memory_exponent(0.9, 0.5, 4);
    REQUIRE_THAT(exp.b, WithinAbs(4.912019, 1e-6));
    REQUIRE_THAT(exp.b2, WithinAbs(0.304006, 1e-6));
    REQUIRE_FALSE(exp.sublinear());

    // High similarity and a wide gap push the exponent below one.
    planner::MemoryExponent easy = planner::memory_exponent(0.99, 0.05, 2);
    REQUIRE(easy.b < 1.0);
    REQUIRE(easy.sublinear());

    // A wider gap (smaller delta) always helps, and the resolution-only
    // exponent never exceeds the full one.
    for (double pv : {0.5, 0.8, 0.95}) {
        REQUIRE(planner::memory_exponent(pv, 0.3, 8).b <
                planner::memory_exponent(pv, 0.5, 8).b);
        planner::MemoryExponent e = planner::memory_exponent(pv, 0.4, 8);
        REQUIRE(e.b2 < e.b);
    }
    REQUIRE_THROWS_AS(planner::memory_exponent(0.0, 0.5, 4), DomainError);
    REQUIRE_THROWS_AS(planner::memory_exponent(0.9, 0.5, 1), DomainError);
}

TEST_CASE("sparsity-bounded size prediction", "[planner]") {
    REQUIRE_THAT(planner::size_under_sparsity(1.0, 0.5, 0.1, 4, 1000),
                 WithinRel(339824.80932841002, 1e-12));
    REQUIRE(planner::size_under_sparsity(2.0, 0.5, 0.1, 4, 1000) >
            planner::size_under_sparsity(1.0, 0.5, 0.1, 4, 1000));
    REQUIRE(planner::size_under_sparsity(1.0, 0.25, 0.1, 4, 1000) >
            planner::size_under_sparsity(1.0, 0.5, 0.1, 4, 1000));
    REQUIRE_THROWS_AS(planner::size_under_sparsity(0.0, 0.5, 0.1, 4, 1000), DomainError);
    REQUIRE_THROWS_AS(planner::size_under_sparsity(1.0, 0.5, 0.1, 4, 1), DomainError);
}

TEST_CASE("resolution gap asymptotics in the dataset size", "[planner]") {
    // With the tail mass at its worst case B = N and the power left unrounded,
    // the resolution gap factors exactly into N^(2 ln p_v / ln(1/delta)) times
    // (1 - N^-2).
    const double pv = 0.9, delta = 0.5;
    for (double n : {1e3, 1e4, 1e5}) {
        double k_real = 2.0 * std::log(n) / std::log(1.0 / delta);
        double eps = planner::resolution_epsilon(pv, delta, k_real);
        double scale = std::pow(n, 2.0 * std::log(pv) / std::log(1.0 / delta));
        REQUIRE_THAT(eps / scale, WithinRel(1.0 - 1.0 / (n * n), 1e-9));
    }
}

TEST_CASE("chosen power caps the tail mass and the score norms", "[planner]") {
    Rng rng(1234);
    for (int t = 0; t < 50; ++t) {
        std::uint32_t n = 20 + rng.below(80);
        std::vector<double> p(n);
        for (auto& v : p) v = 0.001 + 0.999 * rng.uniform01();
        std::sort(p.begin(), p.end(), std::greater<>());
        std::uint32_t v = 1 + rng.below(n / 2);
        if (p[v - 1] <= p[v]) continue; // zero-probability tie guard
        double delta = p[v] / p[v - 1];
        double B = 0.0;
        for (std::uint32_t i = v; i < n; ++i) B += std::sqrt(p[i] / p[v]);
        std::uint32_t K = planner::choose_k(B, delta);

        // Tail never outweighs the v-th score...
        double tail = 0.0;
        for (std::uint32_t i = v; i < n; ++i) tail += std::pow(p[i] / p[v - 1], double(K));
        REQUIRE(tail <= 1.0 + 1e-9);
        // ...and the total score mass stays within v + 1.
        double mass = 0.0;
        for (std::uint32_t i = 0; i < n; ++i) mass += std::pow(p[i], double(K));
        REQUIRE(mass <= double(v) + 1.0 + 1e-9);
    }
}

TEST_CASE("budget assembly is consistent with its parts", "[planner]") {
    planner::PlannerInputs in;
    in.p_v = 0.9;
    in.delta_gap = 0.5;
    in.B = 1000.0;
    in.v = 2;
    in.N = 10000;
    in.fail_delta = 0.05;
    in.lsh_range = 100;
    in.counter_bits = 16;
    planner::PlannerBudget budget = planner::make_budget(in);

    REQUIRE(budget.K == planner::choose_k(1000.0, 0.5));
    REQUIRE_THAT(budget.epsilon,
                 WithinAbs(planner::resolution_epsilon(0.9, 0.5, double(budget.K)), 1e-15));
    planner::CmsDimensions dims = planner::cms_dimensions(3.0, budget.epsilon, 0.025, 10000);
    REQUIRE(budget.d == dims.d);
    REQUIRE(budget.w == dims.w);
    REQUIRE(budget.M == std::uint64_t(dims.d) * dims.w);
    REQUIRE(budget.R == planner::reps_needed(9.0, budget.epsilon / 4.0, 0.025, budget.M));
    planner::MemoryExponent exp = planner::memory_exponent(0.9, 0.5, 100);
    REQUIRE_THAT(budget.b, WithinAbs(exp.b, 1e-15));
    REQUIRE_THAT(budget.b2, WithinAbs(exp.b2, 1e-15));
    REQUIRE(budget.sublinear == exp.sublinear());
    REQUIRE_THAT(budget.size_bits,
                 WithinRel(double(budget.M) * double(budget.R) * 100.0 * 16.0, 1e-12));

    in.v = 0;
    REQUIRE_THROWS_AS(planner::make_budget(in), DomainError);
    in.v = 2;
    in.N = 2;
    REQUIRE_THROWS_AS(planner::make_budget(in), DomainError);
}
