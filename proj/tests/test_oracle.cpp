#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "racecms/oracle.hpp"
#include "racecms/rng.hpp"

using namespace racecms;
using Catch::Matchers::WithinAbs;

TEST_CASE("jaccard on hand-checked pairs", "[oracle]") {
    auto J = [](std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) {
        return oracle::jaccard(make_sparse_vector(std::move(a)), make_sparse_vector(std::move(b)));
    };
    REQUIRE_THAT(J({1, 2, 3}, {2, 3, 4}), WithinAbs(0.5, 1e-15));      // 2 shared of 4
    REQUIRE_THAT(J({1, 2}, {1, 2}), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(J({1, 2}, {3, 4}), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(J({0, 1, 2, 3, 4}, {0}), WithinAbs(0.2, 1e-15)); // 1 of 5
    REQUIRE_THAT(J({7}, {7, 8, 9}), WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE_THAT(oracle::jaccard(make_sparse_vector({1}), SparseVector{}), WithinAbs(0.0, 1e-15));
    REQUIRE_THROWS_AS(oracle::jaccard(SparseVector{}, SparseVector{}), DomainError);
    // symmetry
    REQUIRE(J({1, 5, 9}, {5, 9, 11, 13}) == J({5, 9, 11, 13}, {1, 5, 9}));
}

namespace {
Dataset ladder_dataset() {
    // Jaccard ladder against q = {0,1,2,3}: 1.0, 0.75, 0.5, 0.25, 0.0.
    Dataset ds;
    ds.vectors.push_back(make_sparse_vector({0, 1, 2, 3}));
    ds.vectors.push_back(make_sparse_vector({0, 1, 2}));
    ds.vectors.push_back(make_sparse_vector({0, 1}));
    ds.vectors.push_back(make_sparse_vector({0}));
    ds.vectors.push_back(make_sparse_vector({9, 10}));
    return ds;
}
} // namespace

TEST_CASE("exact scores apply the rehash floor, empty vectors score zero", "[oracle]") {
    Dataset ds = ladder_dataset();
    ds.vectors.push_back(SparseVector{}); // never inserted anywhere
    SparseVector q = make_sparse_vector({0, 1, 2, 3});

    ScoreVector s = oracle::exact_scores(ds, q, 1, 100);
    REQUIRE_THAT(s[0], WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(s[1], WithinAbs(0.7525, 1e-15));
    REQUIRE_THAT(s[2], WithinAbs(0.505, 1e-15));
    REQUIRE_THAT(s[3], WithinAbs(0.2575, 1e-15));
    REQUIRE_THAT(s[4], WithinAbs(0.01, 1e-15)); // disjoint still floors at 1/r
    REQUIRE_THAT(s[5], WithinAbs(0.0, 1e-15));  // empty scores zero, below the floor

    ScoreVector raw = oracle::exact_scores_raw(ds, q, 2);
    REQUIRE_THAT(raw[0], WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(raw[1], WithinAbs(0.5625, 1e-15));
    REQUIRE_THAT(raw[4], WithinAbs(0.0, 1e-15)); // no floor on the raw form
    REQUIRE_THAT(raw[5], WithinAbs(0.0, 1e-15));

    REQUIRE_THROWS_AS(oracle::exact_scores(ds, SparseVector{}, 1, 100), EmptyInput);
}

TEST_CASE("exact top-v agrees with a full sort", "[oracle]") {
    Rng rng(404);
    Dataset ds;
    for (int j = 0; j < 50; ++j) {
        ds.vectors.push_back(SparseVector::from_sorted(rng.sample_without_replacement(200, 15)));
    }
    SparseVector q = ds.vectors[17];

    std::vector<double> sim(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) sim[j] = oracle::jaccard(ds.vectors[j], q);
    std::vector<std::uint32_t> ref(ds.size());
    for (std::uint32_t j = 0; j < ds.size(); ++j) ref[j] = j;
    std::sort(ref.begin(), ref.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (sim[a] != sim[b]) return sim[a] > sim[b];
        return a < b;
    });

    for (std::uint32_t v : {1u, 3u, 10u, 50u}) {
        QueryResult res = oracle::exact_top_v(ds, q, v);
        REQUIRE(res.indices == std::vector<std::uint32_t>(ref.begin(), ref.begin() + v));
        for (std::uint32_t k = 0; k < v; ++k)
            REQUIRE_THAT(res.scores[k], WithinAbs(sim[res.indices[k]], 1e-15));
    }
    REQUIRE(oracle::exact_top_v(ds, q, 1).indices[0] == 17); // the query's twin wins

    REQUIRE_THROWS_AS(oracle::exact_top_v(ds, q, 0), DomainError);
    REQUIRE_THROWS_AS(oracle::exact_top_v(ds, q, 51), DomainError);
    REQUIRE_THROWS_AS(oracle::exact_top_v(ds, SparseVector{}, 5), EmptyInput);
}

TEST_CASE("exact top-v breaks ties toward the smaller index", "[oracle]") {
    Dataset ds;
    ds.vectors.push_back(make_sparse_vector({50, 51}));    // J = 0
    ds.vectors.push_back(make_sparse_vector({0, 1, 2}));   // twin A
    ds.vectors.push_back(make_sparse_vector({0, 1, 2}));   // twin B
    ds.vectors.push_back(make_sparse_vector({0, 1, 2}));   // twin C
    SparseVector q = make_sparse_vector({0, 1, 2});
    QueryResult res = oracle::exact_top_v(ds, q, 4);
    REQUIRE(res.indices == std::vector<std::uint32_t>{1, 2, 3, 0});
}

TEST_CASE("exact measurements partition the score mass across columns", "[oracle]") {
    Rng rng(88);
    Dataset ds;
    for (int j = 0; j < 40; ++j) {
        if (j % 8 == 7) {
            ds.vectors.push_back(SparseVector{}); // empties contribute nothing
        } else {
            ds.vectors.push_back(SparseVector::from_sorted(rng.sample_without_replacement(120, 10)));
        }
    }
    SparseVector q = ds.vectors[3];
    SketchConfig cfg;
    cfg.K = 1;
    cfg.d = 3;
    cfg.w = 7;
    cfg.r = 32;
    cfg.master_seed = 2024;
    HashPlan plan(cfg);

    ScoreVector s = oracle::exact_scores(ds, q, cfg.K, cfg.r);
    oracle::MeasurementMatrix m = oracle::exact_measurements(ds, q, plan);
    REQUIRE(m.d == cfg.d);
    REQUIRE(m.w == cfg.w);

    double total = 0.0;
    for (double v : s) total += v;
    for (std::uint32_t i = 0; i < cfg.d; ++i) {
        double row_sum = 0.0;
        for (std::uint32_t c = 0; c < cfg.w; ++c) row_sum += m.at(i, c);
        REQUIRE_THAT(row_sum, WithinAbs(total, 1e-9));
        for (std::uint32_t c = 0; c < cfg.w; ++c) {
            double expect = 0.0;
            for (std::uint32_t j = 0; j < ds.size(); ++j) {
                if (!ds.vectors[j].empty() && plan.cms_column(i, j) == c) expect += s[j];
            }
            REQUIRE_THAT(m.at(i, c), WithinAbs(expect, 1e-12));
        }
    }
}

TEST_CASE("stability profile on the Jaccard ladder", "[oracle]") {
    Dataset ds = ladder_dataset();
    SparseVector q = make_sparse_vector({0, 1, 2, 3});
    oracle::StabilityProfile prof = oracle::stability_params(ds, q, 2, 2, 100);

    // Per-hash probabilities (floored at 1/100): 1.0, .7525, .505, .2575, .01.
    REQUIRE_THAT(prof.p_v, WithinAbs(0.7525, 1e-15));
    REQUIRE_THAT(prof.p_v1, WithinAbs(0.505, 1e-15));
    REQUIRE_THAT(prof.delta, WithinAbs(0.505 / 0.7525, 1e-15));
    // B at K = 2: (.505/.505)^1 + (.2575/.505)^1 + (.01/.505)^1.
    double expect_b = 1.0 + 0.2575 / 0.505 + 0.01 / 0.505;
    REQUIRE_THAT(prof.B, WithinAbs(expect_b, 1e-12));

    REQUIRE_THROWS_AS(oracle::stability_params(ds, q, 0, 1, 100), DomainError);
    REQUIRE_THROWS_AS(oracle::stability_params(ds, q, 5, 1, 100), DomainError);
    REQUIRE_THROWS_AS(oracle::stability_params(ds, SparseVector{}, 1, 1, 100), EmptyInput);
}

TEST_CASE("equidistant tail mass equals N minus v exactly", "[oracle]") {
    // One perfect neighbor, everything else disjoint from the query: all tail
    // probabilities collapse to the floor, so every ratio is exactly 1.
    Dataset ds;
    ds.vectors.push_back(make_sparse_vector({0, 1}));
    for (std::uint32_t j = 0; j < 63; ++j)
        ds.vectors.push_back(make_sparse_vector({10 + 2 * j, 11 + 2 * j}));
    SparseVector q = make_sparse_vector({0, 1});
    for (std::uint32_t K : {1u, 2u, 5u}) {
        oracle::StabilityProfile prof = oracle::stability_params(ds, q, 1, K, 50);
        REQUIRE_THAT(prof.B, WithinAbs(63.0, 1e-12)); // N - v = 64 - 1
        REQUIRE_THAT(prof.p_v, WithinAbs(1.0, 1e-15));
        REQUIRE_THAT(prof.p_v1, WithinAbs(0.02, 1e-15));
    }
}
