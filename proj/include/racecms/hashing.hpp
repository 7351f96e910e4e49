#pragma once

#include <cstdint>
#include <optional>

#include "racecms/core.hpp"
#include "racecms/errors.hpp"

namespace racecms {

/// splitmix64 finalizer; a bijection on 64-bit integers.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Keyed 64-bit hash of a 64-bit value.
inline constexpr std::uint64_t hash_u64(std::uint64_t seed, std::uint64_t v) noexcept {
    return mix64(seed ^ mix64(v));
}

/// Maps a 64-bit hash onto [0, n) without modulo bias (fixed-point multiply).
inline constexpr std::uint32_t bounded_u32(std::uint64_t x, std::uint32_t n) noexcept {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(x) * n) >> 64);
}

/// One MinHash evaluation: the minimum keyed hash over the set's ids.
/// Equal sets under equal seeds always agree; for random seeds two sets agree
/// with probability equal to their Jaccard similarity.
inline std::uint64_t minhash(std::uint64_t seed, const SparseVector& x) {
    if (x.empty()) throw EmptyInput("minhash of empty set");
    std::uint64_t best = ~0ull;
    for (std::uint32_t id : x.ids()) {
        std::uint64_t h = hash_u64(seed, id);
        if (h < best) best = h;
    }
    return best;
}

/// Collision probability of a K-wise MinHash concatenation rehashed into
/// [0, r): J^K + (1 - J^K) / r.  The additive floor is what a universal rehash
/// of unequal tuples contributes.
inline double collision_model(double jaccard, std::uint32_t K, std::uint32_t r) {
    if (jaccard < 0.0 || jaccard > 1.0) throw DomainError("jaccard outside [0, 1]");
    if (K < 1) throw DomainError("K must be >= 1");
    if (r < 2) throw DomainError("r must be >= 2");
    double jk = 1.0;
    for (std::uint32_t t = 0; t < K; ++t) jk *= jaccard;
    return jk + (1.0 - jk) / static_cast<double>(r);
}

/// All hash seeds for one sketch, derived deterministically from the master
/// seed.  Seeds are produced on demand through an injective tuple encoding fed
/// through a bijective mixer, so distinct (kind, row, rep, column, slot)
/// tuples are guaranteed distinct seeds and no tables are materialized.
class HashPlan {
public:
    explicit HashPlan(const SketchConfig& cfg) : cfg_(cfg) { validate_config(cfg); }

    const SketchConfig& config() const noexcept { return cfg_; }

    /// Seed for MinHash slot t of the LSH attached to (row i, rep o) and, in
    /// PerCell sharing, column j.
    std::uint64_t minhash_seed(std::uint32_t i, std::uint32_t o, std::uint32_t j,
                               std::uint32_t t) const {
        if (cfg_.sharing == LshSharing::PerRowRep) j = 0;
        return derive(1, i, o, j, t);
    }

    /// Seed for the tuple rehash of the same LSH.
    std::uint64_t rehash_seed(std::uint32_t i, std::uint32_t o, std::uint32_t j) const {
        if (cfg_.sharing == LshSharing::PerRowRep) j = 0;
        return derive(2, i, o, j, 0);
    }

    /// Seed for row i's universal column hash.
    std::uint64_t cms_seed(std::uint32_t i) const { return derive(3, i, 0, 0, 0); }

    /// LSH bucket of x for (row i, rep o[, column j]): K MinHashes combined
    /// and rehashed into [0, r).
    std::uint32_t lsh_bucket(std::uint32_t i, std::uint32_t o, std::uint32_t j,
                             const SparseVector& x) const {
        if (x.empty()) throw EmptyInput("lsh_bucket of empty set");
        std::uint64_t acc = rehash_seed(i, o, j);
        for (std::uint32_t t = 0; t < cfg_.K; ++t) {
            acc = mix64(acc ^ minhash(minhash_seed(i, o, j, t), x));
        }
        return bounded_u32(acc, cfg_.r);
    }

    /// Count-min column of dataset index j in row i.
    std::uint32_t cms_column(std::uint32_t i, std::uint64_t j) const {
        return bounded_u32(hash_u64(cms_seed(i), j), cfg_.w);
    }

    bool operator==(const HashPlan& other) const { return cfg_ == other.cfg_; }

private:
    std::uint64_t derive(std::uint64_t kind, std::uint64_t i, std::uint64_t o, std::uint64_t j,
                         std::uint64_t t) const {
        // 63-bit injective packing: kind(3) | i(10) | o(21) | j(21) | t(8).
        std::uint64_t packed = kind << 60 | i << 50 | o << 29 | j << 8 | t;
        return mix64(mix64(cfg_.master_seed ^ packed));
    }

    SketchConfig cfg_;
};

} // namespace racecms
