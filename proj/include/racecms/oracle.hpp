#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/hashing.hpp"

namespace racecms::oracle {

/// Exact Jaccard similarity of two sorted id sets (linear merge).
/// Both sets empty is undefined and raises DomainError; one empty set gives 0.
inline double jaccard(const SparseVector& x, const SparseVector& y) {
    if (x.empty() && y.empty()) throw DomainError("jaccard of two empty sets");
    if (x.empty() || y.empty()) return 0.0;
    const auto& a = x.ids();
    const auto& b = y.ids();
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Ground-truth score vector: what the sketch estimates for each dataset
/// index, i.e. the rehash-floored collision probability of its LSH with the
/// query's.  Empty vectors are never inserted anywhere and score 0.
inline ScoreVector exact_scores(const Dataset& ds, const SparseVector& q, std::uint32_t K,
                                std::uint32_t r) {
    if (q.empty()) throw EmptyInput("query");
    ScoreVector s(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) {
        s[j] = ds.vectors[j].empty() ? 0.0 : collision_model(jaccard(ds.vectors[j], q), K, r);
    }
    return s;
}

/// Idealized variant without the rehash floor: raw J^K.
inline ScoreVector exact_scores_raw(const Dataset& ds, const SparseVector& q, std::uint32_t K) {
    if (q.empty()) throw EmptyInput("query");
    if (K < 1) throw DomainError("K must be >= 1");
    ScoreVector s(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) {
        if (ds.vectors[j].empty()) {
            s[j] = 0.0;
            continue;
        }
        double jac = jaccard(ds.vectors[j], q), jk = 1.0;
        for (std::uint32_t t = 0; t < K; ++t) jk *= jac;
        s[j] = jk;
    }
    return s;
}

/// Indices of the v most similar dataset vectors by exact Jaccard,
/// ties broken toward the smaller index.
inline QueryResult exact_top_v(const Dataset& ds, const SparseVector& q, std::uint32_t v) {
    if (q.empty()) throw EmptyInput("query");
    if (v < 1 || v > ds.size()) throw DomainError("v outside [1, N]");
    std::vector<std::uint32_t> idx(ds.size());
    for (std::uint32_t j = 0; j < ds.size(); ++j) idx[j] = j;
    std::vector<double> sim(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) {
        sim[j] = ds.vectors[j].empty() ? 0.0 : jaccard(ds.vectors[j], q);
    }
    std::partial_sort(idx.begin(), idx.begin() + v, idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (sim[a] != sim[b]) return sim[a] > sim[b];
                          return a < b;
                      });
    QueryResult out;
    out.indices.assign(idx.begin(), idx.begin() + v);
    out.scores.resize(v);
    for (std::uint32_t k = 0; k < v; ++k) out.scores[k] = sim[out.indices[k]];
    return out;
}

/// What each count-min cell measures in expectation: for every row i and
/// column c, the sum of exact scores of the dataset indices hashed to c.
/// A d x w matrix in row-major order.
struct MeasurementMatrix {
    std::uint32_t d = 0;
    std::uint32_t w = 0;
    std::vector<double> values; // d * w, row-major

    double at(std::uint32_t i, std::uint32_t c) const { return values[std::size_t(i) * w + c]; }
};

inline MeasurementMatrix exact_measurements(const Dataset& ds, const SparseVector& q,
                                            const HashPlan& plan) {
    const auto& cfg = plan.config();
    ScoreVector s = exact_scores(ds, q, cfg.K, cfg.r);
    MeasurementMatrix m;
    m.d = cfg.d;
    m.w = cfg.w;
    m.values.assign(std::size_t(cfg.d) * cfg.w, 0.0);
    for (std::uint32_t i = 0; i < cfg.d; ++i) {
        for (std::size_t j = 0; j < ds.size(); ++j) {
            if (ds.vectors[j].empty()) continue; // never inserted
            m.values[std::size_t(i) * cfg.w + plan.cms_column(i, j)] += s[j];
        }
    }
    return m;
}

/// Query-dependent difficulty profile over rehash-floored per-hash collision
/// probabilities p_i = J_i + (1 - J_i)/r (so p_{v+1} > 0 always):
///   delta = p_{v+1} / p_v,  B = sum_{i > v} (p_i / p_{v+1})^{K/2}.
struct StabilityProfile {
    double p_v = 0.0;
    double p_v1 = 0.0;
    double delta = 0.0;
    double B = 0.0;
};

inline StabilityProfile stability_params(const Dataset& ds, const SparseVector& q, std::uint32_t v,
                                         std::uint32_t K, std::uint32_t r) {
    if (q.empty()) throw EmptyInput("query");
    if (K < 1) throw DomainError("K must be >= 1");
    if (v < 1 || ds.size() < std::size_t(v) + 1) throw DomainError("need N >= v + 1");
    std::vector<double> p(ds.size());
    for (std::size_t j = 0; j < ds.size(); ++j) {
        double jac = ds.vectors[j].empty() ? 0.0 : jaccard(ds.vectors[j], q);
        p[j] = collision_model(jac, 1, r);
    }
    std::sort(p.begin(), p.end(), std::greater<>());
    StabilityProfile out;
    out.p_v = p[v - 1];
    out.p_v1 = p[v];
    out.delta = out.p_v1 / out.p_v;
    double B = 0.0;
    for (std::size_t i = v; i < p.size(); ++i) {
        B += std::pow(p[i] / out.p_v1, 0.5 * K);
    }
    out.B = B;
    return out;
}

} // namespace racecms::oracle
