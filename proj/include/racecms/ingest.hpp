#pragma once

#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "racecms/bytes.hpp"
#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/oracle.hpp"
#include "racecms/rng.hpp"

namespace racecms::ingest {

namespace detail {
constexpr char kDatasetMagic[4] = {'R', 'C', 'D', 'S'};
constexpr std::uint16_t kDatasetVersion = 1;

inline std::uint32_t parse_node_id(const std::string& tok, std::size_t line) {
    if (tok.empty()) throw ParseError(line, "empty token");
    std::uint64_t value = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') throw ParseError(line, "non-numeric node id '" + tok + "'");
        value = value * 10 + static_cast<std::uint64_t>(c - '0');
        if (value > 0xFFFFFFFFull) throw OverflowError("node id exceeds 2^32-1");
    }
    return static_cast<std::uint32_t>(value);
}
} // namespace detail

/// Parse a whitespace-delimited edge list ("<src> <dst>" per line, '#' opens a
/// comment line, blank lines ignored).  Node ids are remapped densely to
/// [0, nodes) in first-seen order; original ids become labels.  Each vector is
/// the sorted, duplicate-free out-neighborhood of its node (both directions
/// when undirected).  Nodes that never appear as a source keep empty vectors.
inline Dataset parse_edge_list(std::istream& in, bool undirected = false) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::vector<std::uint32_t> labels;
    std::vector<std::vector<std::uint32_t>> adjacency;
    auto intern = [&](std::uint32_t raw) {
        auto [it, fresh] = remap.emplace(raw, static_cast<std::uint32_t>(labels.size()));
        if (fresh) {
            labels.push_back(raw);
            adjacency.emplace_back();
        }
        return it->second;
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        std::istringstream tokens(line);
        std::string src_tok, dst_tok, extra;
        tokens >> src_tok >> dst_tok;
        if (dst_tok.empty()) throw ParseError(line_no, "expected '<src> <dst>'");
        if (tokens >> extra) throw ParseError(line_no, "unexpected extra token '" + extra + "'");
        std::uint32_t src = intern(detail::parse_node_id(src_tok, line_no));
        std::uint32_t dst = intern(detail::parse_node_id(dst_tok, line_no));
        adjacency[src].push_back(dst);
        if (undirected) adjacency[dst].push_back(src);
    }
    Dataset ds;
    ds.vectors.reserve(adjacency.size());
    for (auto& neighbors : adjacency) {
        ds.vectors.push_back(make_sparse_vector(std::move(neighbors)));
    }
    ds.labels = std::move(labels);
    return ds;
}

inline Dataset parse_edge_list_file(const std::string& path, bool undirected = false) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    return parse_edge_list(in, undirected);
}

/// Corpus summary: exact node/nonzero counts plus a seeded pairwise-similarity
/// sample.  With fewer than two vectors the similarity is undefined and
/// reported as 0 with the flag cleared.
struct DatasetStats {
    std::uint64_t nodes = 0;
    std::uint64_t nonzeros = 0;
    double mean_edges = 0.0;
    double mean_similarity = 0.0;
    bool similarity_defined = false;
};

inline DatasetStats dataset_stats(const Dataset& ds, std::uint64_t sample_pairs,
                                  std::uint64_t seed) {
    DatasetStats out;
    out.nodes = ds.size();
    out.nonzeros = ds.nonzeros();
    out.mean_edges = out.nodes == 0
                         ? 0.0
                         : static_cast<double>(out.nonzeros) / static_cast<double>(out.nodes);
    if (ds.size() < 2 || sample_pairs == 0) return out;
    Rng rng(seed);
    auto n = static_cast<std::uint32_t>(ds.size());
    double total = 0.0;
    for (std::uint64_t t = 0; t < sample_pairs; ++t) {
        std::uint32_t i = rng.below(n);
        std::uint32_t j = rng.below(n - 1);
        if (j >= i) ++j; // uniform over ordered pairs with i != j
        const auto& a = ds.vectors[i];
        const auto& b = ds.vectors[j];
        // pairs touching an empty vector contribute similarity 0
        if (!a.empty() && !b.empty()) total += oracle::jaccard(a, b);
    }
    out.mean_similarity = total / static_cast<double>(sample_pairs);
    out.similarity_defined = true;
    return out;
}

/// Bytes of the canonical compressed-sparse-row encoding the sketch competes
/// against: every id at the smallest of {1,2,4} bytes that holds the largest
/// id value present, plus N+1 offsets at the smallest of {1,2,4,8} bytes that
/// holds the nonzero count.
inline std::uint64_t raw_size_bytes(const Dataset& ds) {
    std::uint64_t max_id = 0;
    std::uint64_t nonzeros = 0;
    for (const auto& v : ds.vectors) {
        nonzeros += v.size();
        if (!v.empty() && v.ids().back() > max_id) max_id = v.ids().back();
    }
    std::uint64_t id_width = max_id <= 0xFFull ? 1 : max_id <= 0xFFFFull ? 2 : 4;
    std::uint64_t off_width = nonzeros <= 0xFFull     ? 1
                              : nonzeros <= 0xFFFFull ? 2
                              : nonzeros <= 0xFFFFFFFFull
                                  ? 4
                                  : 8;
    return nonzeros * id_width + (ds.size() + 1) * off_width;
}

/// Binary cache of a parsed dataset (framed, little-endian, own magic).
inline std::vector<std::uint8_t> serialize_dataset(const Dataset& ds) {
    ByteWriter wtr;
    wtr.magic(detail::kDatasetMagic);
    wtr.u16(detail::kDatasetVersion);
    wtr.u32(static_cast<std::uint32_t>(ds.size()));
    wtr.u8(ds.labels ? 1 : 0);
    for (const auto& v : ds.vectors) {
        wtr.u32(static_cast<std::uint32_t>(v.size()));
        for (std::uint32_t id : v.ids()) wtr.u32(id);
    }
    if (ds.labels) {
        for (std::uint32_t label : *ds.labels) wtr.u32(label);
    }
    return wtr.take();
}

inline Dataset deserialize_dataset(const std::vector<std::uint8_t>& bytes) {
    ByteReader rd(bytes);
    rd.expect_magic(detail::kDatasetMagic, "dataset");
    if (rd.u16() != detail::kDatasetVersion) throw CorruptData("dataset: version");
    std::uint32_t n = rd.u32();
    bool has_labels = rd.u8() != 0;
    Dataset ds;
    ds.vectors.reserve(n);
    for (std::uint32_t j = 0; j < n; ++j) {
        std::uint32_t len = rd.u32();
        std::vector<std::uint32_t> ids(len);
        for (auto& id : ids) id = rd.u32();
        try {
            ds.vectors.push_back(SparseVector::from_sorted(std::move(ids)));
        } catch (const DomainError&) {
            throw CorruptData("dataset: ids not strictly increasing");
        }
    }
    if (has_labels) {
        std::vector<std::uint32_t> labels(n);
        for (auto& label : labels) label = rd.u32();
        ds.labels = std::move(labels);
    }
    rd.expect_end("dataset");
    return ds;
}

} // namespace racecms::ingest
