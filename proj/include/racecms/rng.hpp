#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "racecms/errors.hpp"
#include "racecms/hashing.hpp"

namespace racecms {

/// Deterministic RNG used by sampling and evaluation paths.  Wraps the
/// bit-exact std::mt19937_64 engine but does its own bounded mapping, because
/// std::uniform_int_distribution / std::sample are implementation-defined and
/// would break cross-platform reproducibility of emitted numbers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform draw from [0, n).
    std::uint32_t below(std::uint32_t n) {
        if (n == 0) throw DomainError("bounded draw from empty range");
        return bounded_u32(engine_(), n);
    }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// k distinct values from [0, n), via partial Fisher-Yates; returned sorted.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        if (k > n) throw DomainError("sample larger than population");
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            std::uint32_t j = i + bounded_u32(engine_(), n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace racecms
