#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hopgraph/types.hpp"

namespace hopgraph {

// Directed passage graph: vertices hold passages with their triplets, edges
// are the logical links produced by edge merging.
//
// The graph keeps the full per-out-triplet match assignment ("candidates",
// at most one edge per out-triplet) so incremental updates can revise it
// without re-scanning every pair. The public `edges()` view is the capped
// selection derived from those candidates: identical-feature duplicates are
// dropped, the rest ranked by sim_score and truncated to `edge_cap`.
class PassageGraph {
public:
    PassageGraph() = default;

    // Validates endpoints, forbids self-loops, checks embedding dimensions,
    // then derives the capped edge view.
    PassageGraph(std::vector<Vertex> vertices, std::vector<Edge> candidates,
                 std::size_t dim, std::size_t edge_cap);

    const std::map<std::string, Vertex>& vertices() const { return vertices_; }
    bool has_vertex(const std::string& id) const { return vertices_.count(id) != 0; }

    // Throws KeyError for unknown ids.
    const Vertex& vertex(const std::string& id) const;

    // Capped edges in canonical rank order.
    const std::vector<Edge>& edges() const { return edges_; }

    // Out-edges of one vertex (subset of the capped view); empty when none.
    const std::vector<Edge>& out_edges(const std::string& id) const;

    // Full uncapped merge assignment, one edge per matched out-triplet.
    const std::vector<Edge>& candidate_edges() const { return candidates_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t dim() const { return dim_; }
    std::size_t edge_cap() const { return edge_cap_; }

    // Stable content hash over vertices, capped edges, dim and cap.
    std::uint64_t fingerprint() const;

private:
    void validate() const;
    void derive_capped_view();

    std::map<std::string, Vertex> vertices_;
    std::vector<Edge> candidates_;
    std::vector<Edge> edges_;
    std::map<std::string, std::vector<Edge>> adjacency_;
    std::size_t dim_ = 0;
    std::size_t edge_cap_ = 0;
};

// Edge budget n * ceil(log2(n)) for n vertices; 0 for n <= 1.
std::size_t edge_cap_for(std::size_t n_vertices);

} // namespace hopgraph
