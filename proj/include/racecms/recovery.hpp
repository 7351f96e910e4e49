#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/sketch.hpp"

namespace racecms {

/// Grouping rule for median-of-means: consecutive groups of group_size values,
/// with any leftover appended to the last group.
struct MomPolicy {
    std::uint32_t group_size = 1;

    /// Policy used when collapsing R repetitions: plain median below 9
    /// repetitions, ~9 groups above.
    static MomPolicy for_reps(std::uint32_t R) {
        if (R == 0) throw DomainError("R must be >= 1");
        return MomPolicy{R < 9 ? 1u : (R + 8) / 9};
    }
};

/// Median of consecutive-group means.  An even number of groups takes the
/// midpoint of the two central means.
inline double median_of_means(const std::vector<double>& values, MomPolicy policy) {
    if (values.empty()) throw EmptyInput("median_of_means of no values");
    if (policy.group_size == 0) throw DomainError("group size must be >= 1");
    std::size_t n = values.size();
    std::size_t groups = std::max<std::size_t>(1, n / policy.group_size);
    std::vector<double> means(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        std::size_t begin = g * policy.group_size;
        std::size_t end = (g + 1 == groups) ? n : begin + policy.group_size;
        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k) sum += values[k];
        means[g] = sum / static_cast<double>(end - begin);
    }
    std::sort(means.begin(), means.end());
    if (groups % 2 == 1) return means[groups / 2];
    return 0.5 * (means[groups / 2 - 1] + means[groups / 2]);
}

/// Per-(row, column) measurement estimates for one query, d x w row-major.
struct CellEstimateMatrix {
    std::uint32_t d = 0;
    std::uint32_t w = 0;
    std::vector<double> values;

    double at(std::uint32_t i, std::uint32_t c) const { return values[std::size_t(i) * w + c]; }
};

/// Collapse each cell's R repetition counts at the query's buckets into one
/// estimate via median-of-means.
inline CellEstimateMatrix cell_estimates(const RaceCmsSketch& sk, const SparseVector& q) {
    if (q.empty()) throw EmptyInput("query");
    const SketchConfig& cfg = sk.config();
    const HashPlan& plan = sk.plan();
    MomPolicy policy = MomPolicy::for_reps(cfg.R);
    CellEstimateMatrix est;
    est.d = cfg.d;
    est.w = cfg.w;
    est.values.assign(std::size_t(cfg.d) * cfg.w, 0.0);
    std::vector<double> reps(cfg.R);
    if (cfg.sharing == LshSharing::PerRowRep) {
        // One bucket per (row, rep) serves every column.
        std::vector<std::uint32_t> buckets(std::size_t(cfg.d) * cfg.R);
        for (std::uint32_t i = 0; i < cfg.d; ++i)
            for (std::uint32_t o = 0; o < cfg.R; ++o)
                buckets[std::size_t(i) * cfg.R + o] = plan.lsh_bucket(i, o, 0, q);
        for (std::uint32_t i = 0; i < cfg.d; ++i) {
            for (std::uint32_t c = 0; c < cfg.w; ++c) {
                for (std::uint32_t o = 0; o < cfg.R; ++o)
                    reps[o] = sk.counter_at(i, c, o, buckets[std::size_t(i) * cfg.R + o]);
                est.values[std::size_t(i) * cfg.w + c] = median_of_means(reps, policy);
            }
        }
    } else {
        for (std::uint32_t i = 0; i < cfg.d; ++i) {
            for (std::uint32_t c = 0; c < cfg.w; ++c) {
                for (std::uint32_t o = 0; o < cfg.R; ++o)
                    reps[o] = sk.counter_at(i, c, o, plan.lsh_bucket(i, o, c, q));
                est.values[std::size_t(i) * cfg.w + c] = median_of_means(reps, policy);
            }
        }
    }
    return est;
}

/// Count-min readout: score of index j is the minimum of its row estimates.
inline ScoreVector recover_scores(const CellEstimateMatrix& est, std::size_t N,
                                  const HashPlan& plan) {
    const SketchConfig& cfg = plan.config();
    if (est.d != cfg.d || est.w != cfg.w) throw ConfigMismatch("estimate matrix shape");
    ScoreVector s(N);
    for (std::size_t j = 0; j < N; ++j) {
        double best = est.at(0, plan.cms_column(0, j));
        for (std::uint32_t i = 1; i < cfg.d; ++i) {
            double v = est.at(i, plan.cms_column(i, j));
            if (v < best) best = v;
        }
        s[j] = best;
    }
    return s;
}

/// Top-v indices by score, ties broken toward the smaller index; slots beyond
/// the nonzero scores fill with the lowest-index zero-score entries.
inline QueryResult top_v(const ScoreVector& s, std::uint32_t v) {
    if (v < 1 || std::size_t(v) > s.size()) throw DomainError("v outside [1, N]");
    std::vector<std::uint32_t> idx(s.size());
    for (std::uint32_t j = 0; j < s.size(); ++j) idx[j] = j;
    std::partial_sort(idx.begin(), idx.begin() + v, idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (s[a] != s[b]) return s[a] > s[b];
                          return a < b;
                      });
    QueryResult out;
    out.indices.assign(idx.begin(), idx.begin() + v);
    out.scores.resize(v);
    for (std::uint32_t k = 0; k < v; ++k) out.scores[k] = s[out.indices[k]];
    return out;
}

/// Full read path: estimate cells, recover all N scores, rank the top v.
inline QueryResult query(const RaceCmsSketch& sk, const SparseVector& q, std::size_t N,
                         std::uint32_t v) {
    return top_v(recover_scores(cell_estimates(sk, q), N, sk.plan()), v);
}

} // namespace racecms
