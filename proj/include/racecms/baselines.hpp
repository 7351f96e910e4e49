#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "racecms/bytes.hpp"
#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/hashing.hpp"
#include "racecms/oracle.hpp"
#include "racecms/recovery.hpp"
#include "racecms/rng.hpp"

namespace racecms::baselines {

namespace detail {
constexpr char kProjectionMagic[4] = {'R', 'C', 'P', 'J'};
constexpr char kSampleMagic[4] = {'R', 'C', 'S', 'M'};
constexpr std::uint16_t kBaselineVersion = 1;
} // namespace detail

/// Signed sparse-projection entry for (seed, output coordinate k, input id):
/// +sqrt(3) with probability 1/6, 0 with 2/3, -sqrt(3) with 1/6, derived by
/// hashing so the projection matrix is never materialized.
inline double projection_sigma(std::uint64_t seed, std::uint32_t k, std::uint32_t id) {
    std::uint64_t h = hash_u64(seed, (std::uint64_t(k) << 32) | id);
    std::uint32_t die = bounded_u32(h, 6);
    if (die == 0) return 1.7320508075688772;
    if (die == 5) return -1.7320508075688772;
    return 0.0;
}

/// Dense m-dimensional image of a sparse binary vector, scaled by 1/sqrt(m)
/// so that inner products of projections match set-intersection sizes in
/// expectation.  Linear over disjoint id sets; the empty set maps to zero.
inline std::vector<float> project(const SparseVector& x, std::uint32_t m, std::uint64_t seed) {
    if (m < 1) throw DomainError("m must be >= 1");
    std::vector<double> acc(m, 0.0);
    for (std::uint32_t id : x.ids()) {
        for (std::uint32_t k = 0; k < m; ++k) acc[k] += projection_sigma(seed, k, id);
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<float> out(m);
    for (std::uint32_t k = 0; k < m; ++k) out[k] = static_cast<float>(acc[k] * scale);
    return out;
}

/// All kept dataset vectors projected to m dimensions (float32 dense rows).
struct ProjectedDataset {
    std::uint32_t m = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> original_indices;
    std::vector<float> rows; // original_indices.size() * m, row-major

    std::size_t size() const noexcept { return original_indices.size(); }

    // magic(4) + version(2) + m(4) + seed(8) + count(4)
    static constexpr std::size_t kHeaderBytes = 22;

    std::size_t memory_footprint() const {
        return kHeaderBytes + original_indices.size() * 4 + rows.size() * 4;
    }

    std::vector<std::uint8_t> serialize() const {
        ByteWriter wtr;
        wtr.magic(detail::kProjectionMagic);
        wtr.u16(detail::kBaselineVersion);
        wtr.u32(m);
        wtr.u64(seed);
        wtr.u32(static_cast<std::uint32_t>(original_indices.size()));
        for (std::uint32_t idx : original_indices) wtr.u32(idx);
        for (float v : rows) wtr.f32(v);
        return wtr.take();
    }

    static ProjectedDataset deserialize(const std::vector<std::uint8_t>& bytes) {
        ByteReader rd(bytes);
        rd.expect_magic(detail::kProjectionMagic, "projection");
        if (rd.u16() != detail::kBaselineVersion) throw CorruptData("projection: version");
        ProjectedDataset out;
        out.m = rd.u32();
        out.seed = rd.u64();
        std::uint32_t count = rd.u32();
        out.original_indices.resize(count);
        for (auto& idx : out.original_indices) idx = rd.u32();
        out.rows.resize(std::size_t(count) * out.m);
        for (auto& v : out.rows) v = rd.f32();
        rd.expect_end("projection");
        return out;
    }
};

/// Project every vector of ds whose index passes `keep` (empty vectors map to
/// zero rows and are kept so indices stay meaningful).
template <typename KeepFn>
ProjectedDataset build_projected(const Dataset& ds, std::uint32_t m, std::uint64_t seed,
                                 KeepFn&& keep) {
    ProjectedDataset out;
    out.m = m;
    out.seed = seed;
    for (std::uint32_t j = 0; j < ds.size(); ++j) {
        if (!keep(j)) continue;
        out.original_indices.push_back(j);
        std::vector<float> row = project(ds.vectors[j], m, seed);
        out.rows.insert(out.rows.end(), row.begin(), row.end());
    }
    return out;
}

inline ProjectedDataset build_projected(const Dataset& ds, std::uint32_t m, std::uint64_t seed) {
    return build_projected(ds, m, seed, [](std::uint32_t) { return true; });
}

/// Nearest rows to the projected query by Euclidean distance; scores are
/// negated distances so larger is better.  Ties break toward the smaller
/// original index.
inline QueryResult query_projected(const ProjectedDataset& pd, const SparseVector& q,
                                   std::uint32_t v) {
    if (q.empty()) throw EmptyInput("query");
    if (v < 1 || v > pd.size()) throw DomainError("v outside [1, size]");
    std::vector<float> pq = project(q, pd.m, pd.seed);
    ScoreVector neg_dist(pd.size());
    for (std::size_t row = 0; row < pd.size(); ++row) {
        double acc = 0.0;
        const float* base = pd.rows.data() + row * pd.m;
        for (std::uint32_t k = 0; k < pd.m; ++k) {
            double diff = double(base[k]) - double(pq[k]);
            acc += diff * diff;
        }
        neg_dist[row] = -std::sqrt(acc);
    }
    QueryResult local = top_v(neg_dist, v);
    for (auto& idx : local.indices) idx = pd.original_indices[idx];
    return local;
}

/// A uniformly decimated copy of the dataset: ceil(fraction * N) vectors kept
/// without replacement, stored sparsely with their original indices.
struct SampledDataset {
    double fraction = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> original_indices; // ascending
    std::vector<SparseVector> vectors;

    std::size_t size() const noexcept { return original_indices.size(); }

    // magic(4) + version(2) + fraction(8) + seed(8) + count(4)
    static constexpr std::size_t kHeaderBytes = 26;

    /// Header plus, per kept vector, (original index, length) and 4 bytes per id.
    std::size_t memory_footprint() const {
        std::size_t bytes = kHeaderBytes;
        for (const auto& v : vectors) bytes += 8 + v.size() * 4;
        return bytes;
    }

    std::vector<std::uint8_t> serialize() const {
        ByteWriter wtr;
        wtr.magic(detail::kSampleMagic);
        wtr.u16(detail::kBaselineVersion);
        wtr.f64(fraction);
        wtr.u64(seed);
        wtr.u32(static_cast<std::uint32_t>(original_indices.size()));
        for (std::size_t k = 0; k < vectors.size(); ++k) {
            wtr.u32(original_indices[k]);
            wtr.u32(static_cast<std::uint32_t>(vectors[k].size()));
            for (std::uint32_t id : vectors[k].ids()) wtr.u32(id);
        }
        return wtr.take();
    }

    static SampledDataset deserialize(const std::vector<std::uint8_t>& bytes) {
        ByteReader rd(bytes);
        rd.expect_magic(detail::kSampleMagic, "sample");
        if (rd.u16() != detail::kBaselineVersion) throw CorruptData("sample: version");
        SampledDataset out;
        out.fraction = rd.f64();
        out.seed = rd.u64();
        std::uint32_t count = rd.u32();
        out.original_indices.resize(count);
        out.vectors.resize(count);
        for (std::uint32_t k = 0; k < count; ++k) {
            out.original_indices[k] = rd.u32();
            std::uint32_t len = rd.u32();
            std::vector<std::uint32_t> ids(len);
            for (auto& id : ids) id = rd.u32();
            out.vectors[k] = SparseVector::from_sorted(std::move(ids));
        }
        rd.expect_end("sample");
        return out;
    }
};

/// Keep ceil(fraction * |eligible|) uniformly chosen eligible indices.
template <typename KeepFn>
SampledDataset sample(const Dataset& ds, double fraction, std::uint64_t seed, KeepFn&& keep) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("fraction must be in (0, 1]");
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t j = 0; j < ds.size(); ++j)
        if (keep(j)) eligible.push_back(j);
    if (eligible.empty()) throw EmptyInput("no vectors to sample");
    auto n = static_cast<std::uint32_t>(eligible.size());
    auto want = static_cast<std::uint32_t>(
        std::ceil(fraction * static_cast<double>(n)));
    if (want < 1) want = 1;
    if (want > n) want = n;
    Rng rng(seed);
    std::vector<std::uint32_t> picks = rng.sample_without_replacement(n, want);
    SampledDataset out;
    out.fraction = fraction;
    out.seed = seed;
    for (std::uint32_t p : picks) {
        out.original_indices.push_back(eligible[p]);
        out.vectors.push_back(ds.vectors[eligible[p]]);
    }
    return out;
}

inline SampledDataset sample(const Dataset& ds, double fraction, std::uint64_t seed) {
    return sample(ds, fraction, seed, [](std::uint32_t) { return true; });
}

/// Exact Jaccard top-v over the survivors, reporting original indices.
/// Returns min(v, kept) entries.
inline QueryResult query_sampled(const SampledDataset& sd, const SparseVector& q,
                                 std::uint32_t v) {
    if (q.empty()) throw EmptyInput("query");
    if (v < 1) throw DomainError("v must be >= 1");
    if (sd.size() == 0) throw EmptyInput("sampled dataset is empty");
    auto take = static_cast<std::uint32_t>(std::min<std::size_t>(v, sd.size()));
    ScoreVector sim(sd.size());
    for (std::size_t k = 0; k < sd.size(); ++k) {
        sim[k] = sd.vectors[k].empty() ? 0.0 : oracle::jaccard(sd.vectors[k], q);
    }
    QueryResult local = top_v(sim, take);
    for (auto& idx : local.indices) idx = sd.original_indices[idx];
    return local;
}

} // namespace racecms::baselines
