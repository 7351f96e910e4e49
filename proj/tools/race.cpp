// Command-line front end: ingest | sketch | query | plan | eval | selftest.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "racecms/racecms.hpp"

namespace {

using namespace racecms;

struct IngestArgs {
    std::string input;
    std::string output;
    bool undirected = false;
    std::uint64_t sample_pairs = 100000;
    std::uint64_t seed = 1;
};

int cmd_ingest(const IngestArgs& args) {
    Dataset ds = ingest::parse_edge_list_file(args.input, args.undirected);
    ingest::DatasetStats stats = ingest::dataset_stats(ds, args.sample_pairs, args.seed);
    std::uint64_t raw = ingest::raw_size_bytes(ds);
    std::printf("nodes            %" PRIu64 "\n", stats.nodes);
    std::printf("nonzeros         %" PRIu64 "\n", stats.nonzeros);
    std::printf("mean_edges       %.3f\n", stats.mean_edges);
    if (stats.similarity_defined)
        std::printf("mean_similarity  %.6f  (sampled %" PRIu64 " pairs, seed %" PRIu64 ")\n",
                    stats.mean_similarity, args.sample_pairs, args.seed);
    else
        std::printf("mean_similarity  0  (undefined: fewer than two vectors)\n");
    std::printf("raw_size_bytes   %" PRIu64 "\n", raw);
    if (!args.output.empty()) {
        write_file(args.output, ingest::serialize_dataset(ds));
        std::printf("cache written    %s\n", args.output.c_str());
    }
    return 0;
}

struct SketchArgs {
    std::string cache;
    std::string output;
    SketchConfig cfg;
    std::string storage = "map";
    std::string sharing = "perrowrep";
};

int cmd_sketch(SketchArgs& args) {
    if (args.storage == "array")
        args.cfg.storage = StorageMode::Array;
    else if (args.storage == "map")
        args.cfg.storage = StorageMode::Map;
    else
        throw InvalidConfig("--storage must be array or map");
    if (args.sharing == "perrowrep")
        args.cfg.sharing = LshSharing::PerRowRep;
    else if (args.sharing == "percell")
        args.cfg.sharing = LshSharing::PerCell;
    else
        throw InvalidConfig("--sharing must be perrowrep or percell");
    validate_config(args.cfg);
    Dataset ds = ingest::deserialize_dataset(read_file(args.cache));
    RaceCmsSketch sk(args.cfg);
    std::uint64_t skipped = 0;
    for (std::uint32_t j = 0; j < ds.size(); ++j) {
        if (ds.vectors[j].empty()) {
            ++skipped;
            continue;
        }
        sk.insert(j, ds.vectors[j]);
    }
    write_file(args.output, sk.serialize());
    std::printf("inserted          %" PRIu64 "\n", sk.n_inserted());
    std::printf("skipped_empty     %" PRIu64 "\n", skipped);
    std::printf("memory_footprint  %zu bytes\n", sk.memory_footprint());
    std::printf("raw_size_bytes    %" PRIu64 "\n", ingest::raw_size_bytes(ds));
    std::printf("sketch written    %s\n", args.output.c_str());
    return 0;
}

struct QueryArgs {
    std::string sketch;
    std::string cache;
    std::uint32_t node = 0;
    std::uint32_t v = 20;
};

int cmd_query(const QueryArgs& args) {
    RaceCmsSketch sk = RaceCmsSketch::deserialize(read_file(args.sketch));
    Dataset ds = ingest::deserialize_dataset(read_file(args.cache));
    std::uint32_t index = args.node;
    if (ds.labels) {
        auto lookup = ds.label_index();
        auto it = lookup.find(args.node);
        if (it == lookup.end()) throw DomainError("unknown node " + std::to_string(args.node));
        index = it->second;
    } else if (index >= ds.size()) {
        throw DomainError("node index out of range");
    }
    const SparseVector& q = ds.vectors[index];
    if (q.empty()) throw EmptyInput("query node has no neighbors");
    std::uint32_t v = std::min<std::uint32_t>(args.v, static_cast<std::uint32_t>(ds.size()));
    QueryResult res = query(sk, q, ds.size(), v);
    std::printf("rank  node  score\n");
    for (std::size_t k = 0; k < res.size(); ++k) {
        std::uint32_t label = ds.labels ? (*ds.labels)[res.indices[k]] : res.indices[k];
        std::printf("%4zu  %u  %.6f\n", k + 1, label, res.scores[k]);
    }
    return 0;
}

struct PlanArgs {
    double pv = 0.0;
    double delta = 0.0;
    std::uint32_t r = 100;
    std::uint64_t N = 0;
    double fail_delta = 0.05;
    double B = 0.0; // 0: equidistant default N - v
    std::uint32_t v = 1;
    std::uint32_t bits = 16;
};

int cmd_plan(const PlanArgs& args) {
    planner::PlannerInputs in;
    in.p_v = args.pv;
    in.delta_gap = args.delta;
    in.lsh_range = args.r;
    in.N = args.N;
    in.fail_delta = args.fail_delta;
    in.v = args.v;
    in.counter_bits = args.bits;
    in.B = args.B > 0.0 ? args.B : static_cast<double>(args.N - args.v);
    planner::PlannerBudget budget = planner::make_budget(in);
    std::printf("K           %u\n", budget.K);
    std::printf("epsilon     %.6g\n", budget.epsilon);
    std::printf("d x w       %u x %u  (M = %" PRIu64 ")\n", budget.d, budget.w, budget.M);
    std::printf("R           %" PRIu64 "\n", budget.R);
    std::printf("b           %.4f\n", budget.b);
    std::printf("b2          %.4f\n", budget.b2);
    std::printf("size_bits   %.4g\n", budget.size_bits);
    if (!budget.sublinear)
        std::printf("warning: b >= 1, sketch is not sub-linear for this profile\n");
    return 0;
}

struct EvalArgs {
    std::string cache;
    std::string output;
    std::vector<std::string> methods = {"map-race", "array-race", "projection", "sampling"};
    std::vector<std::string> race_points;
    std::vector<std::uint32_t> proj_points;
    std::vector<double> sample_points;
    std::uint32_t queries = 500;
    std::uint64_t seed = 1;
    std::uint32_t v = 20;
    bool strict_removal = false;
    bool zero_times = false;
    unsigned threads = 0;
};

SketchConfig parse_race_point(const std::string& text) {
    SketchConfig cfg;
    std::vector<std::uint32_t> parts;
    std::string token;
    std::istringstream stream(text);
    while (std::getline(stream, token, ',')) {
        try {
            parts.push_back(static_cast<std::uint32_t>(std::stoul(token)));
        } catch (const std::exception&) {
            throw InvalidConfig("--race expects K,d,w,R,r[,bits]");
        }
    }
    if (parts.size() != 5 && parts.size() != 6)
        throw InvalidConfig("--race expects K,d,w,R,r[,bits]");
    cfg.K = parts[0];
    cfg.d = parts[1];
    cfg.w = parts[2];
    cfg.R = parts[3];
    cfg.r = parts[4];
    cfg.counter_bits = parts.size() == 6 ? parts[5] : 16;
    validate_config(cfg);
    return cfg;
}

int cmd_eval(const EvalArgs& args) {
    Dataset ds = ingest::deserialize_dataset(read_file(args.cache));
    std::vector<SketchConfig> race_grid;
    if (args.race_points.empty()) {
        for (std::uint32_t K : {1u, 2u})
            for (std::uint32_t d : {2u, 3u})
                for (std::uint32_t w : {100u, 300u})
                    for (std::uint32_t R : {2u, 4u})
                        for (std::uint32_t r : {100u, 1000u}) {
                            SketchConfig cfg;
                            cfg.K = K;
                            cfg.d = d;
                            cfg.w = w;
                            cfg.R = R;
                            cfg.r = r;
                            race_grid.push_back(cfg);
                        }
    } else {
        for (const auto& text : args.race_points) race_grid.push_back(parse_race_point(text));
    }
    std::vector<std::uint32_t> proj_grid =
        args.proj_points.empty() ? std::vector<std::uint32_t>{5, 20, 100, 500} : args.proj_points;
    std::vector<double> sample_grid = args.sample_points.empty()
                                          ? std::vector<double>{0.01, 0.05, 0.1, 0.5}
                                          : args.sample_points;
    std::vector<eval::MethodPoint> grid;
    for (const std::string& name : args.methods) {
        if (name == "map-race" || name == "array-race") {
            eval::Method method =
                name == "map-race" ? eval::Method::MapRace : eval::Method::ArrayRace;
            for (const auto& cfg : race_grid) {
                eval::MethodPoint pt;
                pt.method = method;
                pt.race = cfg;
                grid.push_back(pt);
            }
        } else if (name == "projection") {
            for (std::uint32_t m : proj_grid) {
                eval::MethodPoint pt;
                pt.method = eval::Method::RandomProjection;
                pt.proj_m = m;
                grid.push_back(pt);
            }
        } else if (name == "sampling") {
            for (double f : sample_grid) {
                eval::MethodPoint pt;
                pt.method = eval::Method::RandomSampling;
                pt.fraction = f;
                grid.push_back(pt);
            }
        } else {
            throw InvalidConfig("unknown method '" + name +
                                "' (map-race|array-race|projection|sampling)");
        }
    }
    eval::EvalOptions opt;
    opt.v = args.v;
    opt.seed = args.seed;
    opt.strict_removal = args.strict_removal;
    opt.zero_times = args.zero_times;
    opt.threads = args.threads;
    std::vector<std::uint32_t> queries = eval::select_queries(ds, args.queries, args.seed);
    std::fprintf(stderr, "selected %zu queries; running %zu grid points\n", queries.size(),
                 grid.size());
    std::vector<eval::EvalRecord> records = eval::run_eval(ds, queries, grid, opt);
    std::string csv = eval::to_csv(records);
    if (args.output.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream out(args.output, std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + args.output);
        out << csv;
        std::fprintf(stderr, "wrote %s\n", args.output.c_str());
    }
    return 0;
}

// ---- selftest ----------------------------------------------------------

bool check(bool ok, const char* name, std::string detail = "") {
    if (ok)
        std::printf("PASS %s\n", name);
    else
        std::printf("FAIL %s%s%s\n", name, detail.empty() ? "" : ": ", detail.c_str());
    return ok;
}

int cmd_selftest() {
    bool all = true;

    { // MinHash collision rate vs exact Jaccard
        auto x = make_sparse_vector({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
        auto y = make_sparse_vector({0, 1, 2, 3, 4, 5, 6, 20, 21, 22});
        double jac = oracle::jaccard(x, y);
        int trials = 4000, hits = 0;
        for (int t = 0; t < trials; ++t)
            hits += minhash(9000 + t, x) == minhash(9000 + t, y) ? 1 : 0;
        double emp = double(hits) / trials;
        double sigma = std::sqrt(jac * (1 - jac) / trials);
        all &= check(std::fabs(emp - jac) <= 4 * sigma, "minhash_collision_rate",
                     "emp=" + std::to_string(emp) + " exact=" + std::to_string(jac));
    }
    { // collision model arithmetic
        bool ok = std::fabs(collision_model(0.0, 1, 16) - 1.0 / 16) < 1e-15 &&
                  std::fabs(collision_model(1.0, 3, 16) - 1.0) < 1e-15 &&
                  collision_model(0.8, 2, 64) > collision_model(0.5, 2, 64);
        all &= check(ok, "collision_model");
    }
    { // sketch counters match an independent hash tally, Array == Map
        SketchConfig cfg;
        cfg.K = 1;
        cfg.d = 2;
        cfg.w = 4;
        cfg.R = 3;
        cfg.r = 8;
        cfg.master_seed = 42;
        std::vector<SparseVector> data;
        for (std::uint32_t j = 0; j < 5; ++j)
            data.push_back(make_sparse_vector({j, j + 1, j + 2, 50 + j}));
        RaceCmsSketch arr(cfg);
        SketchConfig mapcfg = cfg;
        mapcfg.storage = StorageMode::Map;
        RaceCmsSketch mp(mapcfg);
        for (std::uint32_t j = 0; j < 5; ++j) {
            arr.insert(j, data[j]);
            mp.insert(j, data[j]);
        }
        HashPlan plan(cfg);
        bool ok = arr.counter_total() == 5ull * cfg.d * cfg.R;
        for (std::uint32_t j = 0; j < 5 && ok; ++j) {
            for (std::uint32_t i = 0; i < cfg.d; ++i) {
                std::uint32_t col = plan.cms_column(i, j);
                for (std::uint32_t o = 0; o < cfg.R; ++o) {
                    std::uint32_t bucket = plan.lsh_bucket(i, o, col, data[j]);
                    ok = ok && arr.counter_at(i, col, o, bucket) >= 1;
                }
            }
        }
        for (std::uint32_t i = 0; i < cfg.d && ok; ++i)
            for (std::uint32_t c = 0; c < cfg.w; ++c)
                for (std::uint32_t o = 0; o < cfg.R; ++o)
                    for (std::uint32_t bk = 0; bk < cfg.r; ++bk)
                        ok = ok && arr.counter_at(i, c, o, bk) == mp.counter_at(i, c, o, bk);
        all &= check(ok, "sketch_tally_and_storage_equality");
    }
    { // serialize round trip
        SketchConfig cfg;
        cfg.d = 2;
        cfg.w = 8;
        cfg.R = 2;
        cfg.r = 32;
        cfg.storage = StorageMode::Map;
        cfg.master_seed = 3;
        RaceCmsSketch sk(cfg);
        for (std::uint32_t j = 0; j < 20; ++j)
            sk.insert(j, make_sparse_vector({j, 2 * j + 1, 3 * j + 2}));
        auto bytes = sk.serialize();
        auto back = RaceCmsSketch::deserialize(bytes);
        all &= check(bytes == back.serialize() && bytes.size() == sk.memory_footprint(),
                     "serialize_roundtrip");
    }
    { // with exact measurements the recovered score never undershoots
        Rng rng(5);
        Dataset ds;
        for (int j = 0; j < 100; ++j) {
            auto ids = rng.sample_without_replacement(300, 12);
            ds.vectors.push_back(SparseVector::from_sorted(std::move(ids)));
        }
        SparseVector q = ds.vectors[0];
        SketchConfig cfg;
        cfg.K = 1;
        cfg.d = 4;
        cfg.w = 16;
        cfg.r = 32;
        cfg.master_seed = 11;
        HashPlan plan(cfg);
        ScoreVector s = oracle::exact_scores(ds, q, cfg.K, cfg.r);
        oracle::MeasurementMatrix meas = oracle::exact_measurements(ds, q, plan);
        CellEstimateMatrix est;
        est.d = meas.d;
        est.w = meas.w;
        est.values = meas.values;
        ScoreVector recovered = recover_scores(est, ds.size(), plan);
        bool ok = true;
        for (std::size_t j = 0; j < ds.size(); ++j) ok = ok && recovered[j] >= s[j];
        all &= check(ok, "one_sided_recovery");
    }
    { // ranking ties break toward the smaller index
        ScoreVector s = {0.5, 0.9, 0.9, 0.1};
        QueryResult res = top_v(s, 3);
        all &= check(res.indices == std::vector<std::uint32_t>{1, 2, 0}, "top_v_tie_order");
    }
    if (!all) return 1;
    std::printf("all selftests passed\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sub-linear-memory near-neighbor sketching over sparse sets"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "parse an edge list and cache the dataset");
    ingest_cmd->add_option("input", ingest_args.input, "edge list file")->required();
    ingest_cmd->add_option("-o,--output", ingest_args.output, "dataset cache path");
    ingest_cmd->add_flag("--undirected", ingest_args.undirected, "insert both edge directions");
    ingest_cmd->add_option("--sample-pairs", ingest_args.sample_pairs,
                           "pairs sampled for mean similarity");
    ingest_cmd->add_option("--seed", ingest_args.seed, "similarity sampling seed");

    SketchArgs sketch_args;
    auto* sketch_cmd = app.add_subcommand("sketch", "build a sketch from a dataset cache");
    sketch_cmd->add_option("cache", sketch_args.cache, "dataset cache")->required();
    sketch_cmd->add_option("-o,--output", sketch_args.output, "sketch path")->required();
    sketch_cmd->add_option("--K", sketch_args.cfg.K, "LSH concatenation depth");
    sketch_cmd->add_option("--d", sketch_args.cfg.d, "grid rows");
    sketch_cmd->add_option("--w", sketch_args.cfg.w, "grid columns");
    sketch_cmd->add_option("--R", sketch_args.cfg.R, "repetitions per cell");
    sketch_cmd->add_option("--r", sketch_args.cfg.r, "LSH bucket range");
    sketch_cmd->add_option("--bits", sketch_args.cfg.counter_bits, "counter width (8|16|32)");
    sketch_cmd->add_option("--storage", sketch_args.storage, "array|map");
    sketch_cmd->add_option("--sharing", sketch_args.sharing, "perrowrep|percell");
    sketch_cmd->add_option("--seed", sketch_args.cfg.master_seed, "master seed");

    QueryArgs query_args;
    auto* query_cmd = app.add_subcommand("query", "rank neighbors of a node");
    query_cmd->add_option("sketch", query_args.sketch, "sketch file")->required();
    query_cmd->add_option("cache", query_args.cache, "dataset cache")->required();
    query_cmd->add_option("--node", query_args.node, "node label")->required();
    query_cmd->add_option("--v", query_args.v, "neighbors to report");

    PlanArgs plan_args;
    auto* plan_cmd = app.add_subcommand("plan", "select sketch parameters for a profile");
    plan_cmd->add_option("--pv", plan_args.pv, "collision probability at rank v")->required();
    plan_cmd->add_option("--delta", plan_args.delta, "stability gap p_{v+1}/p_v")->required();
    plan_cmd->add_option("--r", plan_args.r, "LSH bucket range");
    plan_cmd->add_option("--N", plan_args.N, "dataset size")->required();
    plan_cmd->add_option("--delta-fail", plan_args.fail_delta, "failure probability budget");
    plan_cmd->add_option("--B", plan_args.B, "tail mass ratio (default equidistant N-v)");
    plan_cmd->add_option("--v", plan_args.v, "neighbors sought");
    plan_cmd->add_option("--bits", plan_args.bits, "counter width for the size estimate");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "recall-versus-compression sweep, CSV out");
    eval_cmd->add_option("cache", eval_args.cache, "dataset cache")->required();
    eval_cmd->add_option("-o,--output", eval_args.output, "CSV path (default stdout)");
    eval_cmd->add_option("--methods", eval_args.methods,
                         "map-race|array-race|projection|sampling")
        ->delimiter(',');
    eval_cmd->add_option("--race", eval_args.race_points, "race grid point K,d,w,R,r[,bits]");
    eval_cmd->add_option("--proj", eval_args.proj_points, "projection dimension m");
    eval_cmd->add_option("--sample", eval_args.sample_points, "sampling fraction");
    eval_cmd->add_option("--queries", eval_args.queries, "number of evaluated queries");
    eval_cmd->add_option("--seed", eval_args.seed, "evaluation seed");
    eval_cmd->add_option("--v", eval_args.v, "neighbors retrieved per query");
    eval_cmd->add_flag("--strict-removal", eval_args.strict_removal,
                       "rebuild per query with only that query removed");
    eval_cmd->add_flag("--zero-times", eval_args.zero_times, "zero wall-time columns");
    eval_cmd->add_option("--threads", eval_args.threads, "worker threads (default RACE_THREADS)");

    auto* selftest_cmd = app.add_subcommand("selftest", "quick oracle-backed checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd) return cmd_ingest(ingest_args);
        if (*sketch_cmd) return cmd_sketch(sketch_args);
        if (*query_cmd) return cmd_query(query_args);
        if (*plan_cmd) return cmd_plan(plan_args);
        if (*eval_cmd) return cmd_eval(eval_args);
        if (*selftest_cmd) return cmd_selftest();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
