#pragma once

#include <string>

#include "hopgraph/graph.hpp"

namespace hopgraph {

// Provenance recorded alongside a saved graph. None of it participates in
// the graph fingerprint.
struct BuildMeta {
    std::string embedder;
    std::string extractor;
    std::string chat;
    std::string created_at; // ISO 8601, filled by the writer if empty
    std::string notes;
};

struct LoadedGraph {
    PassageGraph graph;
    BuildMeta meta;
};

struct GraphStats {
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
    double avg_out_degree = 0.0;
    double avg_passage_chars = 0.0;
};

// Writes a single-file archive: a fixed header (magic, format version,
// payload size, payload checksum) followed by a JSON payload with every
// vertex and candidate edge. The write goes to a temp file and renames
// into place, so readers never observe a half-written archive.
void save(const PassageGraph& graph, const BuildMeta& meta, const std::string& path);

// Rejects wrong magic bytes, truncation, and checksum mismatches with
// ChecksumError, and unsupported format versions with a VersionError that
// names both versions. A loaded graph reproduces the original fingerprint.
LoadedGraph load(const std::string& path);

GraphStats stats(const PassageGraph& graph);

// Current ISO 8601 UTC timestamp, e.g. "2026-02-03T04:05:06Z".
std::string now_iso8601();

} // namespace hopgraph
