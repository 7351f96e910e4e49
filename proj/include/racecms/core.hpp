#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "racecms/errors.hpp"

namespace racecms {

/// A set-valued data point: strictly increasing 32-bit ids.  The sorted-unique
/// invariant is established at construction and relied on everywhere
/// (Jaccard merges, hashing, serialization).
class SparseVector {
public:
    SparseVector() = default;

    /// Sorts and deduplicates.  Idempotent: applying it to an already valid
    /// id list returns the same vector.
    static SparseVector from_unsorted(std::vector<std::uint32_t> ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return SparseVector(std::move(ids));
    }

    /// Trusts the caller; verifies the invariant and throws DomainError if the
    /// ids are not strictly increasing.
    static SparseVector from_sorted(std::vector<std::uint32_t> ids) {
        for (std::size_t i = 1; i < ids.size(); ++i) {
            if (ids[i] <= ids[i - 1]) throw DomainError("ids not strictly increasing");
        }
        return SparseVector(std::move(ids));
    }

    const std::vector<std::uint32_t>& ids() const noexcept { return ids_; }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t size() const noexcept { return ids_.size(); }

    bool operator==(const SparseVector&) const = default;

private:
    explicit SparseVector(std::vector<std::uint32_t> ids) : ids_(std::move(ids)) {}
    std::vector<std::uint32_t> ids_;
};

inline SparseVector make_sparse_vector(std::vector<std::uint32_t> ids) {
    return SparseVector::from_unsorted(std::move(ids));
}

/// An indexed collection of sparse vectors with optional external labels
/// (e.g. original graph node ids).  Labels, when present, are unique and
/// aligned with the vectors.
struct Dataset {
    std::vector<SparseVector> vectors;
    std::optional<std::vector<std::uint32_t>> labels;

    std::size_t size() const noexcept { return vectors.size(); }

    std::uint64_t nonzeros() const noexcept {
        std::uint64_t n = 0;
        for (const auto& v : vectors) n += v.size();
        return n;
    }

    /// Label -> index lookup; throws DomainError if there are no labels and
    /// ConfigMismatch if labels are malformed.
    std::unordered_map<std::uint32_t, std::uint32_t> label_index() const {
        if (!labels) throw DomainError("dataset has no labels");
        if (labels->size() != vectors.size()) throw ConfigMismatch("labels/vectors length mismatch");
        std::unordered_map<std::uint32_t, std::uint32_t> out;
        out.reserve(labels->size());
        for (std::uint32_t i = 0; i < labels->size(); ++i) {
            if (!out.emplace((*labels)[i], i).second) throw ConfigMismatch("duplicate label");
        }
        return out;
    }
};

enum class StorageMode : std::uint8_t { Array = 0, Map = 1 };

/// How LSH functions are shared across the grid: one function per (row, rep)
/// slot (the memory/speed default) or an independent function per
/// (row, column, rep) cell.
enum class LshSharing : std::uint8_t { PerRowRep = 0, PerCell = 1 };

/// Full description of a sketch; two sketches are mergeable iff their configs
/// (including master_seed) compare equal.
struct SketchConfig {
    std::uint32_t K = 1;            // LSH concatenation depth
    std::uint32_t d = 2;            // grid rows
    std::uint32_t w = 100;          // grid columns
    std::uint32_t R = 4;            // ACE repetitions per cell
    std::uint32_t r = 100;          // LSH bucket range
    std::uint32_t counter_bits = 16;
    StorageMode storage = StorageMode::Array;
    LshSharing sharing = LshSharing::PerRowRep;
    std::uint64_t master_seed = 0;

    bool operator==(const SketchConfig&) const = default;
};

// Upper bounds exist so that (kind, row, rep, column, slot) tuples pack into
// an injective 63-bit seed-derivation key; they exceed any practical setting.
inline constexpr std::uint32_t kMaxRows = 1023;
inline constexpr std::uint32_t kMaxCols = (1u << 21) - 1;
inline constexpr std::uint32_t kMaxReps = (1u << 21) - 1;
inline constexpr std::uint32_t kMaxConcat = 255;

/// Validates every field; throws InvalidConfig naming the offending field.
inline void validate_config(const SketchConfig& cfg) {
    if (cfg.K < 1 || cfg.K > kMaxConcat) throw InvalidConfig("K must be in [1, 255]");
    if (cfg.d < 1 || cfg.d > kMaxRows) throw InvalidConfig("d must be in [1, 1023]");
    if (cfg.w < 1 || cfg.w > kMaxCols) throw InvalidConfig("w must be in [1, 2^21-1]");
    if (cfg.R < 1 || cfg.R > kMaxReps) throw InvalidConfig("R must be in [1, 2^21-1]");
    if (cfg.r < 2) throw InvalidConfig("r must be >= 2");
    if (cfg.counter_bits != 8 && cfg.counter_bits != 16 && cfg.counter_bits != 32)
        throw InvalidConfig("counter_bits must be 8, 16, or 32");
    if (cfg.storage != StorageMode::Array && cfg.storage != StorageMode::Map)
        throw InvalidConfig("storage mode");
    if (cfg.sharing != LshSharing::PerRowRep && cfg.sharing != LshSharing::PerCell)
        throw InvalidConfig("lsh sharing mode");
    using u128 = unsigned __int128;
    u128 cells = u128(cfg.d) * cfg.w * cfg.R;
    if (cells > 0xFFFFFFFFull) throw InvalidConfig("d*w*R must fit in 32 bits");
    if (cells * cfg.r > (u128(1) << 62)) throw InvalidConfig("d*w*R*r must fit in 62 bits");
}

/// Per-index similarity scores, aligned with dataset indices.
using ScoreVector = std::vector<double>;

/// Ranked neighbor indices with their scores, best first.
struct QueryResult {
    std::vector<std::uint32_t> indices;
    std::vector<double> scores;

    std::size_t size() const noexcept { return indices.size(); }
};

} // namespace racecms
