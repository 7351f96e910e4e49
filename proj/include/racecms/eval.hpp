#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "racecms/baselines.hpp"
#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/ingest.hpp"
#include "racecms/oracle.hpp"
#include "racecms/recovery.hpp"
#include "racecms/rng.hpp"
#include "racecms/sketch.hpp"

namespace racecms::eval {

/// Fraction of the truth set found in the result; empty truth is a skip, not
/// a zero, so it is reported as nullopt.
inline std::optional<double> recall_at(const std::vector<std::uint32_t>& result,
                                       const std::vector<std::uint32_t>& truth) {
    if (truth.empty()) return std::nullopt;
    std::unordered_set<std::uint32_t> found(result.begin(), result.end());
    std::size_t hit = 0;
    for (std::uint32_t t : truth)
        if (found.count(t)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

enum class Method { ArrayRace, MapRace, RandomProjection, RandomSampling };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::ArrayRace: return "ArrayRace";
        case Method::MapRace: return "MapRace";
        case Method::RandomProjection: return "RandomProjection";
        default: return "RandomSampling";
    }
}

/// One grid point: a method plus its parameters (only the relevant member is
/// read for each method).
struct MethodPoint {
    Method method = Method::MapRace;
    SketchConfig race;        // storage field is overridden by `method`
    std::uint32_t proj_m = 0; // RandomProjection
    double fraction = 0.0;    // RandomSampling

    std::string params_string() const {
        char buf[128];
        switch (method) {
            case Method::ArrayRace:
            case Method::MapRace:
                std::snprintf(buf, sizeof buf, "K=%u;d=%u;w=%u;R=%u;r=%u;bits=%u", race.K, race.d,
                              race.w, race.R, race.r, race.counter_bits);
                break;
            case Method::RandomProjection:
                std::snprintf(buf, sizeof buf, "m=%u", proj_m);
                break;
            default: std::snprintf(buf, sizeof buf, "f=%.6g", fraction); break;
        }
        return buf;
    }
};

/// One CSV row.
struct EvalRecord {
    Method method = Method::MapRace;
    std::string params;
    std::uint64_t bytes = 0;
    double inv_ratio = 0.0; // bytes / raw_size_bytes
    double recall_080 = 0.0;
    double recall_090 = 0.0;
    std::uint32_t n_queries = 0;
    double build_s = 0.0;
    double query_s = 0.0;
    bool pareto = false;
};

struct EvalOptions {
    std::uint32_t v = 20;
    double threshold_low = 0.8;
    double threshold_high = 0.9;
    std::uint64_t seed = 1;
    bool strict_removal = false; // rebuild per query with only that query removed
    bool zero_times = false;     // deterministic CSV: zero the wall-time columns
    unsigned threads = 0;        // 0: take RACE_THREADS, else 1
};

inline unsigned effective_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RACE_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

/// Deterministic chunked parallel map over [0, n): output depends only on fn,
/// never on the schedule.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, n == 0 ? 1 : static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t begin = t * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Uniformly pick `count` query indices (seeded, without replacement) from the
/// indices whose exact similarity->=0.9 neighbor set (excluding self) is
/// nonempty.  Rejection sampling keeps the choice uniform over eligible
/// indices without an all-pairs pass.
inline std::vector<std::uint32_t> select_queries(const Dataset& ds, std::uint32_t count,
                                                 std::uint64_t seed, double min_sim = 0.9) {
    if (count == 0) throw DomainError("query count must be >= 1");
    auto n = static_cast<std::uint32_t>(ds.size());
    if (n < 2) throw DomainError("dataset too small for queries");
    Rng rng(seed);
    std::vector<std::uint32_t> order = rng.sample_without_replacement(n, n);
    // sample_without_replacement returns sorted ids; shuffle deterministically
    for (std::uint32_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<std::uint32_t> picked;
    for (std::uint32_t candidate : order) {
        if (picked.size() == count) break;
        const auto& q = ds.vectors[candidate];
        if (q.empty()) continue;
        bool eligible = false;
        for (std::uint32_t j = 0; j < n && !eligible; ++j) {
            if (j == candidate || ds.vectors[j].empty()) continue;
            eligible = oracle::jaccard(ds.vectors[j], q) >= min_sim;
        }
        if (eligible) picked.push_back(candidate);
    }
    if (picked.size() < count)
        throw DomainError("only " + std::to_string(picked.size()) + " eligible queries");
    std::sort(picked.begin(), picked.end());
    return picked;
}

namespace detail {

struct TruthSets {
    std::vector<std::uint32_t> low;  // similarity >= threshold_low
    std::vector<std::uint32_t> high; // similarity >= threshold_high
};

/// Ground truth for one query over the allowed indices (query indices and
/// empty vectors never qualify).
inline TruthSets truth_for(const Dataset& ds, std::uint32_t q_idx,
                           const std::vector<char>& excluded, const EvalOptions& opt) {
    TruthSets out;
    const auto& q = ds.vectors[q_idx];
    for (std::uint32_t j = 0; j < ds.size(); ++j) {
        if (j == q_idx || excluded[j] || ds.vectors[j].empty()) continue;
        double sim = oracle::jaccard(ds.vectors[j], q);
        if (sim >= opt.threshold_low) out.low.push_back(j);
        if (sim >= opt.threshold_high) out.high.push_back(j);
    }
    return out;
}

/// Rank over allowed indices only: excluded indices can never leak into a
/// result set.
inline std::vector<std::uint32_t> top_allowed(const ScoreVector& s, std::uint32_t v,
                                              const std::vector<char>& excluded,
                                              std::uint32_t self) {
    std::vector<std::uint32_t> idx;
    idx.reserve(s.size());
    for (std::uint32_t j = 0; j < s.size(); ++j)
        if (!excluded[j] && j != self) idx.push_back(j);
    auto take = std::min<std::size_t>(v, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + take, idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (s[a] != s[b]) return s[a] > s[b];
                          return a < b;
                      });
    idx.resize(take);
    return idx;
}

struct MethodRun {
    std::uint64_t bytes = 0;
    double build_s = 0.0;
    double query_s = 0.0;
    // per query: result indices (already restricted to allowed indices)
    std::vector<std::vector<std::uint32_t>> results;
};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline RaceCmsSketch build_race(const Dataset& ds, const SketchConfig& cfg,
                                const std::vector<char>& excluded) {
    RaceCmsSketch sk(cfg);
    for (std::uint32_t j = 0; j < ds.size(); ++j) {
        if (excluded[j] || ds.vectors[j].empty()) continue;
        sk.insert(j, ds.vectors[j]);
    }
    return sk;
}

inline MethodRun run_race(const Dataset& ds, const std::vector<std::uint32_t>& queries,
                          const SketchConfig& cfg, const std::vector<char>& excluded,
                          const EvalOptions& opt, unsigned threads) {
    MethodRun run;
    run.results.resize(queries.size());
    if (opt.strict_removal) {
        // Strictest protocol: rebuild with only the evaluated query removed.
        Timer total;
        double query_time = 0.0;
        std::vector<char> self_only(ds.size(), 0);
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            std::uint32_t q_idx = queries[qi];
            self_only[q_idx] = 1;
            RaceCmsSketch sk = build_race(ds, cfg, self_only);
            self_only[q_idx] = 0;
            if (qi == 0) run.bytes = sk.memory_footprint();
            Timer qt;
            ScoreVector s = recover_scores(cell_estimates(sk, ds.vectors[q_idx]), ds.size(),
                                           sk.plan());
            run.results[qi] = top_allowed(s, opt.v, self_only, q_idx);
            query_time += qt.seconds();
        }
        run.query_s = query_time;
        run.build_s = total.seconds() - query_time;
        return run;
    }
    Timer bt;
    RaceCmsSketch sk = build_race(ds, cfg, excluded);
    run.build_s = bt.seconds();
    run.bytes = sk.memory_footprint();
    Timer qt;
    parallel_for(queries.size(), threads, [&](std::size_t qi) {
        std::uint32_t q_idx = queries[qi];
        ScoreVector s =
            recover_scores(cell_estimates(sk, ds.vectors[q_idx]), ds.size(), sk.plan());
        run.results[qi] = top_allowed(s, opt.v, excluded, q_idx);
    });
    run.query_s = qt.seconds();
    return run;
}

inline MethodRun run_projection(const Dataset& ds, const std::vector<std::uint32_t>& queries,
                                std::uint32_t m, const std::vector<char>& excluded,
                                const EvalOptions& opt, unsigned threads) {
    MethodRun run;
    run.results.resize(queries.size());
    auto keep = [&](std::uint32_t j) { return !excluded[j]; };
    Timer bt;
    baselines::ProjectedDataset pd = baselines::build_projected(ds, m, opt.seed, keep);
    run.build_s = bt.seconds();
    run.bytes = pd.memory_footprint();
    Timer qt;
    parallel_for(queries.size(), threads, [&](std::size_t qi) {
        QueryResult res = baselines::query_projected(
            pd, ds.vectors[queries[qi]],
            static_cast<std::uint32_t>(std::min<std::size_t>(opt.v, pd.size())));
        run.results[qi] = res.indices;
    });
    run.query_s = qt.seconds();
    return run;
}

inline MethodRun run_sampling(const Dataset& ds, const std::vector<std::uint32_t>& queries,
                              double fraction, const std::vector<char>& excluded,
                              const EvalOptions& opt, unsigned threads) {
    MethodRun run;
    run.results.resize(queries.size());
    auto keep = [&](std::uint32_t j) { return !excluded[j] && !ds.vectors[j].empty(); };
    Timer bt;
    baselines::SampledDataset sd = baselines::sample(ds, fraction, opt.seed, keep);
    run.build_s = bt.seconds();
    run.bytes = sd.memory_footprint();
    Timer qt;
    parallel_for(queries.size(), threads, [&](std::size_t qi) {
        QueryResult res = baselines::query_sampled(sd, ds.vectors[queries[qi]], opt.v);
        run.results[qi] = res.indices;
    });
    run.query_s = qt.seconds();
    return run;
}

} // namespace detail

/// A record is on its method's frontier unless another record of the same
/// method has strictly smaller bytes and at-least-equal recall at both
/// thresholds.
inline void mark_pareto(std::vector<EvalRecord>& records) {
    for (auto& rec : records) {
        rec.pareto = true;
        for (const auto& other : records) {
            if (&other == &rec || other.method != rec.method) continue;
            if (other.bytes < rec.bytes && other.recall_080 >= rec.recall_080 &&
                other.recall_090 >= rec.recall_090) {
                rec.pareto = false;
                break;
            }
        }
    }
}

/// Run every grid point against the same withheld-query protocol and report
/// one record per point.  Queries must be nonempty dataset indices; ground
/// truth and result ranking both exclude all query indices (or, under
/// strict_removal, only the evaluated query).
inline std::vector<EvalRecord> run_eval(const Dataset& ds,
                                        const std::vector<std::uint32_t>& queries,
                                        const std::vector<MethodPoint>& grid,
                                        const EvalOptions& opt) {
    if (queries.empty()) throw EmptyInput("no queries");
    for (std::uint32_t q : queries) {
        if (q >= ds.size()) throw DomainError("query index out of range");
        if (ds.vectors[q].empty()) throw EmptyInput("query vector is empty");
    }
    unsigned threads = effective_threads(opt.threads);
    std::vector<char> excluded(ds.size(), 0);
    if (!opt.strict_removal) {
        for (std::uint32_t q : queries) excluded[q] = 1;
    }
    // Ground truth per query (under strict removal only the query itself is
    // withheld, so other query indices may appear as truth).
    std::vector<detail::TruthSets> truth(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t qi) {
        std::vector<char> not_self(ds.size(), 0);
        truth[qi] = detail::truth_for(ds, queries[qi],
                                      opt.strict_removal ? not_self : excluded, opt);
    });
    std::uint64_t raw_bytes = ingest::raw_size_bytes(ds);
    std::vector<EvalRecord> records;
    records.reserve(grid.size());
    for (const MethodPoint& point : grid) {
        detail::MethodRun run;
        switch (point.method) {
            case Method::ArrayRace:
            case Method::MapRace: {
                SketchConfig cfg = point.race;
                cfg.storage = point.method == Method::ArrayRace ? StorageMode::Array
                                                                : StorageMode::Map;
                cfg.master_seed = cfg.master_seed ? cfg.master_seed : opt.seed;
                run = detail::run_race(ds, queries, cfg, excluded, opt, threads);
                break;
            }
            case Method::RandomProjection:
                run = detail::run_projection(ds, queries, point.proj_m, excluded, opt, threads);
                break;
            default:
                run = detail::run_sampling(ds, queries, point.fraction, excluded, opt, threads);
                break;
        }
        EvalRecord rec;
        rec.method = point.method;
        rec.params = point.params_string();
        rec.bytes = run.bytes;
        rec.inv_ratio = raw_bytes == 0 ? 0.0
                                       : static_cast<double>(run.bytes) /
                                             static_cast<double>(raw_bytes);
        rec.n_queries = static_cast<std::uint32_t>(queries.size());
        double sum_low = 0.0, sum_high = 0.0;
        std::size_t n_low = 0, n_high = 0;
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            if (auto r = recall_at(run.results[qi], truth[qi].low)) {
                sum_low += *r;
                ++n_low;
            }
            if (auto r = recall_at(run.results[qi], truth[qi].high)) {
                sum_high += *r;
                ++n_high;
            }
        }
        rec.recall_080 = n_low == 0 ? 0.0 : sum_low / static_cast<double>(n_low);
        rec.recall_090 = n_high == 0 ? 0.0 : sum_high / static_cast<double>(n_high);
        rec.build_s = opt.zero_times ? 0.0 : run.build_s;
        rec.query_s = opt.zero_times ? 0.0 : run.query_s;
        records.push_back(std::move(rec));
    }
    mark_pareto(records);
    return records;
}

inline std::string csv_header() {
    return "method,params,bytes,inv_ratio,recall_080,recall_090,n_queries,build_s,query_s,pareto";
}

inline std::string csv_row(const EvalRecord& rec) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%s,%s,%llu,%.6f,%.6f,%.6f,%u,%.3f,%.3f,%d",
                  method_name(rec.method), rec.params.c_str(),
                  static_cast<unsigned long long>(rec.bytes), rec.inv_ratio, rec.recall_080,
                  rec.recall_090, rec.n_queries, rec.build_s, rec.query_s, rec.pareto ? 1 : 0);
    return buf;
}

inline std::string to_csv(const std::vector<EvalRecord>& records) {
    std::string out = csv_header() + "\n";
    for (const auto& rec : records) out += csv_row(rec) + "\n";
    return out;
}

} // namespace racecms::eval
