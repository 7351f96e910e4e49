#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <variant>
#include <vector>

#include "racecms/bytes.hpp"
#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/hashing.hpp"

namespace racecms {

namespace detail {

constexpr char kSketchMagic[4] = {'R', 'A', 'C', 'E'};
constexpr std::uint16_t kSketchVersion = 1;
// magic(4) + version(2) + K,d,w,R,r(20) + bits,storage,sharing(3) + master_seed(8) + n_inserted(8)
constexpr std::size_t kSketchHeaderBytes = 45;

} // namespace detail

/// Sub-linear-memory similarity sketch: a d x w count-min grid whose cells
/// each hold R arrays of r LSH-bucket counters.  Inserting index j increments
/// one counter per (row, rep); querying reads the counters selected by the
/// query's own LSH buckets.  Single-writer; shard-and-merge is the supported
/// concurrency model.
class RaceCmsSketch {
public:
    explicit RaceCmsSketch(const SketchConfig& cfg) : cfg_(cfg), plan_(cfg) {
        if (cfg_.storage == StorageMode::Array) {
            std::uint64_t n = total_counters();
            switch (cfg_.counter_bits) {
                case 8: storage_ = std::vector<std::uint8_t>(n, 0); break;
                case 16: storage_ = std::vector<std::uint16_t>(n, 0); break;
                default: storage_ = std::vector<std::uint32_t>(n, 0); break;
            }
        } else {
            storage_ = MapStore{};
        }
    }

    const SketchConfig& config() const noexcept { return cfg_; }
    const HashPlan& plan() const noexcept { return plan_; }
    std::uint64_t n_inserted() const noexcept { return n_inserted_; }

    std::uint64_t total_cells() const noexcept {
        return std::uint64_t(cfg_.d) * cfg_.w * cfg_.R;
    }

    std::uint64_t total_counters() const noexcept { return total_cells() * cfg_.r; }

    std::uint32_t counter_max() const noexcept {
        return cfg_.counter_bits >= 32 ? 0xFFFFFFFFu : (1u << cfg_.counter_bits) - 1;
    }

    /// Insert dataset index j with its id set.  All d*R target counters are
    /// checked against the counter width first, so on CounterOverflow the
    /// sketch is left unmodified.
    void insert(std::uint32_t j, const SparseVector& x) {
        if (x.empty()) throw EmptyInput("insert of empty vector");
        std::vector<std::uint64_t> targets;
        targets.reserve(std::size_t(cfg_.d) * cfg_.R);
        for (std::uint32_t i = 0; i < cfg_.d; ++i) {
            std::uint32_t col = plan_.cms_column(i, j);
            for (std::uint32_t o = 0; o < cfg_.R; ++o) {
                targets.push_back(linear_index(i, col, o, plan_.lsh_bucket(i, o, col, x)));
            }
        }
        std::uint32_t max = counter_max();
        for (std::uint64_t t : targets) {
            if (counter_at_linear(t) >= max) {
                throw CounterOverflow("counter at " + std::to_string(cfg_.counter_bits) +
                                      " bits; sketch unmodified");
            }
        }
        for (std::uint64_t t : targets) increment(t);
        ++n_inserted_;
    }

    std::uint32_t counter_at(std::uint32_t i, std::uint32_t col, std::uint32_t o,
                             std::uint32_t bucket) const {
        if (i >= cfg_.d || col >= cfg_.w || o >= cfg_.R || bucket >= cfg_.r)
            throw DomainError("counter index out of range");
        return counter_at_linear(linear_index(i, col, o, bucket));
    }

    std::uint64_t counter_total() const {
        std::uint64_t sum = 0;
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, MapStore>) {
                    for (const auto& [k, v] : s.counters) sum += v;
                } else {
                    for (auto v : s) sum += v;
                }
            },
            storage_);
        return sum;
    }

    /// Elementwise counter sum of two sketches built from disjoint index sets
    /// under identical configs (ConfigMismatch otherwise).
    static RaceCmsSketch merge(const RaceCmsSketch& a, const RaceCmsSketch& b) {
        if (a.cfg_ != b.cfg_) throw ConfigMismatch("merge requires identical configs");
        RaceCmsSketch out = a;
        std::uint32_t max = out.counter_max();
        if (std::holds_alternative<MapStore>(b.storage_)) {
            auto& dst = std::get<MapStore>(out.storage_).counters;
            for (const auto& [k, v] : std::get<MapStore>(b.storage_).counters) {
                std::uint64_t sum = std::uint64_t(dst[k]) + v;
                if (sum > max) throw CounterOverflow("merge exceeds counter width");
                dst[k] = static_cast<std::uint32_t>(sum);
            }
        } else {
            std::visit(
                [&](auto& dst) {
                    using T = std::decay_t<decltype(dst)>;
                    if constexpr (!std::is_same_v<T, MapStore>) {
                        const auto& src = std::get<T>(b.storage_);
                        for (std::size_t i = 0; i < dst.size(); ++i) {
                            std::uint64_t sum = std::uint64_t(dst[i]) + src[i];
                            if (sum > max) throw CounterOverflow("merge exceeds counter width");
                            dst[i] = static_cast<typename T::value_type>(sum);
                        }
                    }
                },
                out.storage_);
        }
        out.n_inserted_ = a.n_inserted_ + b.n_inserted_;
        return out;
    }

    /// Serialized size in bytes; equals serialize().size() exactly and is the
    /// byte figure used in all compression accounting.
    std::size_t memory_footprint() const {
        std::size_t bytes = detail::kSketchHeaderBytes;
        if (cfg_.storage == StorageMode::Array) {
            bytes += total_counters() * (cfg_.counter_bits / 8);
        } else {
            const auto& m = std::get<MapStore>(storage_).counters;
            bytes += 4; // nonempty-cell count
            std::uint64_t cells = count_nonempty_cells();
            bytes += cells * 8;                          // per-cell directory
            bytes += m.size() * (4 + cfg_.counter_bits / 8); // bucket + counter entries
        }
        return bytes;
    }

    std::vector<std::uint8_t> serialize() const {
        ByteWriter wtr;
        wtr.magic(detail::kSketchMagic);
        wtr.u16(detail::kSketchVersion);
        wtr.u32(cfg_.K);
        wtr.u32(cfg_.d);
        wtr.u32(cfg_.w);
        wtr.u32(cfg_.R);
        wtr.u32(cfg_.r);
        wtr.u8(static_cast<std::uint8_t>(cfg_.counter_bits));
        wtr.u8(static_cast<std::uint8_t>(cfg_.storage));
        wtr.u8(static_cast<std::uint8_t>(cfg_.sharing));
        wtr.u64(cfg_.master_seed);
        wtr.u64(n_inserted_);
        if (cfg_.storage == StorageMode::Array) {
            std::visit(
                [&](const auto& s) {
                    using T = std::decay_t<decltype(s)>;
                    if constexpr (!std::is_same_v<T, MapStore>) {
                        for (auto v : s) write_counter(wtr, v);
                    }
                },
                storage_);
        } else {
            // Group entries by cell: (cell id, entry count) directory followed
            // by (bucket, counter) pairs, everything in ascending order so the
            // encoding is canonical.
            std::map<std::uint64_t, std::uint32_t> sorted(
                std::get<MapStore>(storage_).counters.begin(),
                std::get<MapStore>(storage_).counters.end());
            std::vector<std::pair<std::uint32_t, std::uint32_t>> cells; // (cell, count)
            for (const auto& [k, v] : sorted) {
                std::uint32_t cell = static_cast<std::uint32_t>(k / cfg_.r);
                if (cells.empty() || cells.back().first != cell) cells.emplace_back(cell, 0);
                ++cells.back().second;
            }
            wtr.u32(static_cast<std::uint32_t>(cells.size()));
            auto it = sorted.begin();
            for (const auto& [cell, count] : cells) {
                wtr.u32(cell);
                wtr.u32(count);
                for (std::uint32_t e = 0; e < count; ++e, ++it) {
                    wtr.u32(static_cast<std::uint32_t>(it->first % cfg_.r));
                    write_counter(wtr, it->second);
                }
            }
        }
        return wtr.take();
    }

    static RaceCmsSketch deserialize(const std::vector<std::uint8_t>& bytes) {
        ByteReader rd(bytes);
        try {
            rd.expect_magic(detail::kSketchMagic, "sketch");
            std::uint16_t version = rd.u16();
            if (version != detail::kSketchVersion)
                throw CorruptSketch("unsupported version " + std::to_string(version));
            SketchConfig cfg;
            cfg.K = rd.u32();
            cfg.d = rd.u32();
            cfg.w = rd.u32();
            cfg.R = rd.u32();
            cfg.r = rd.u32();
            cfg.counter_bits = rd.u8();
            cfg.storage = static_cast<StorageMode>(rd.u8());
            cfg.sharing = static_cast<LshSharing>(rd.u8());
            cfg.master_seed = rd.u64();
            try {
                validate_config(cfg);
            } catch (const InvalidConfig& e) {
                throw CorruptSketch(e.what());
            }
            RaceCmsSketch sk(cfg);
            sk.n_inserted_ = rd.u64();
            if (cfg.storage == StorageMode::Array) {
                std::visit(
                    [&](auto& s) {
                        using T = std::decay_t<decltype(s)>;
                        if constexpr (!std::is_same_v<T, MapStore>) {
                            for (auto& v : s)
                                v = static_cast<typename T::value_type>(read_counter(rd, cfg));
                        }
                    },
                    sk.storage_);
            } else {
                auto& m = std::get<MapStore>(sk.storage_).counters;
                std::uint32_t ncells = rd.u32();
                std::uint64_t prev_cell = 0;
                bool first_cell = true;
                for (std::uint32_t c = 0; c < ncells; ++c) {
                    std::uint32_t cell = rd.u32();
                    std::uint32_t count = rd.u32();
                    if (cell >= sk.total_cells()) throw CorruptSketch("cell id out of range");
                    if (!first_cell && cell <= prev_cell) throw CorruptSketch("cells out of order");
                    if (count == 0) throw CorruptSketch("empty cell in directory");
                    first_cell = false;
                    prev_cell = cell;
                    std::uint64_t prev_bucket = 0;
                    for (std::uint32_t e = 0; e < count; ++e) {
                        std::uint32_t bucket = rd.u32();
                        std::uint32_t value = read_counter(rd, cfg);
                        if (bucket >= cfg.r) throw CorruptSketch("bucket out of range");
                        if (e > 0 && bucket <= prev_bucket)
                            throw CorruptSketch("buckets out of order");
                        if (value == 0) throw CorruptSketch("zero counter stored");
                        prev_bucket = bucket;
                        m.emplace(std::uint64_t(cell) * cfg.r + bucket, value);
                    }
                }
            }
            rd.expect_end("sketch");
            return sk;
        } catch (const CorruptSketch&) {
            throw;
        } catch (const CorruptData& e) {
            throw CorruptSketch(e.what());
        }
    }

private:
    struct MapStore {
        std::unordered_map<std::uint64_t, std::uint32_t> counters;
    };

    std::uint64_t linear_index(std::uint32_t i, std::uint32_t col, std::uint32_t o,
                               std::uint32_t bucket) const noexcept {
        return ((std::uint64_t(i) * cfg_.w + col) * cfg_.R + o) * cfg_.r + bucket;
    }

    std::uint32_t counter_at_linear(std::uint64_t idx) const {
        return std::visit(
            [&](const auto& s) -> std::uint32_t {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, MapStore>) {
                    auto it = s.counters.find(idx);
                    return it == s.counters.end() ? 0u : it->second;
                } else {
                    return s[idx];
                }
            },
            storage_);
    }

    void increment(std::uint64_t idx) {
        std::visit(
            [&](auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, MapStore>) {
                    ++s.counters[idx];
                } else {
                    ++s[idx];
                }
            },
            storage_);
    }

    std::uint64_t count_nonempty_cells() const {
        const auto& m = std::get<MapStore>(storage_).counters;
        std::vector<std::uint64_t> cells;
        cells.reserve(m.size());
        for (const auto& [k, v] : m) cells.push_back(k / cfg_.r);
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        return cells.size();
    }

    void write_counter(ByteWriter& wtr, std::uint32_t v) const {
        switch (cfg_.counter_bits) {
            case 8: wtr.u8(static_cast<std::uint8_t>(v)); break;
            case 16: wtr.u16(static_cast<std::uint16_t>(v)); break;
            default: wtr.u32(v); break;
        }
    }

    static std::uint32_t read_counter(ByteReader& rd, const SketchConfig& cfg) {
        switch (cfg.counter_bits) {
            case 8: return rd.u8();
            case 16: return rd.u16();
            default: return rd.u32();
        }
    }

    SketchConfig cfg_;
    HashPlan plan_;
    std::variant<std::vector<std::uint8_t>, std::vector<std::uint16_t>,
                 std::vector<std::uint32_t>, MapStore>
        storage_;
    std::uint64_t n_inserted_ = 0;
};

/// A single LSH-bucket array with real-valued coefficients: inserting (c, x)
/// adds c to the bucket of x, so the array totals the inserted coefficients
/// and the count at the query's bucket estimates a coefficient-weighted
/// collision sum.
class WeightedAce {
public:
    WeightedAce(std::uint32_t K, std::uint32_t lsh_range, std::uint64_t seed)
        : plan_(make_config(K, lsh_range, seed)), array_(lsh_range, 0.0) {}

    void insert(double coeff, const SparseVector& x) {
        if (x.empty()) throw EmptyInput("insert of empty vector");
        if (!(coeff >= -1.0 && coeff <= 1.0)) throw DomainError("coefficient outside [-1, 1]");
        array_[plan_.lsh_bucket(0, 0, 0, x)] += coeff;
    }

    double value_at(const SparseVector& q) const {
        if (q.empty()) throw EmptyInput("query");
        return array_[plan_.lsh_bucket(0, 0, 0, q)];
    }

    double sum() const {
        double s = 0.0;
        for (double v : array_) s += v;
        return s;
    }

    const std::vector<double>& array() const noexcept { return array_; }

private:
    static SketchConfig make_config(std::uint32_t K, std::uint32_t r, std::uint64_t seed) {
        SketchConfig cfg;
        cfg.K = K;
        cfg.d = 1;
        cfg.w = 1;
        cfg.R = 1;
        cfg.r = r;
        cfg.master_seed = seed;
        return cfg;
    }

    HashPlan plan_;
    std::vector<double> array_;
};

inline void ace_weighted_insert(WeightedAce& ace, double coeff, const SparseVector& x) {
    ace.insert(coeff, x);
}

} // namespace racecms
