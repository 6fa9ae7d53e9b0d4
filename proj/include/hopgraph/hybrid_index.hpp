#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hopgraph/graph.hpp"
#include "hopgraph/types.hpp"

namespace hopgraph {

// Scores a query against many (keywords, embedding) rows: an inverted
// keyword table feeds the set-overlap half and a dense matrix feeds the
// cosine half. Produces exactly the same numbers as calling hybrid_sim
// row by row — the index changes the walk, not the math.
class HybridIndex {
public:
    HybridIndex() = default;

    // Rows are numbered in insertion order.
    void add(const Keywords& keywords, const Embedding& embedding);

    std::size_t size() const { return keyword_sizes_.size(); }
    std::size_t dim() const { return dim_; }

    // Hybrid similarity of the query against every row, by row id.
    std::vector<double> score_all(const Keywords& query_keywords,
                                  const Embedding& query_embedding) const;

    // (row id, score) sorted by score descending, row id ascending.
    std::vector<std::pair<std::size_t, double>> rank_all(const Keywords& query_keywords,
                                                         const Embedding& query_embedding) const;

    // Row id i = position i in graph.edges().
    static HybridIndex over_edges(const PassageGraph& graph);

    // Row id i = i-th vertex in ascending id order; ids written to ids_out.
    static HybridIndex over_passages(const PassageGraph& graph,
                                     std::vector<std::string>* ids_out = nullptr);

private:
    std::unordered_map<std::string, std::vector<std::size_t>> postings_; // term -> row ids
    std::vector<std::size_t> keyword_sizes_;                             // |keywords| per row
    std::vector<float> dense_;                                           // rows x dim
    std::vector<double> norm_sq_;                                        // sum of squares per row
    std::size_t dim_ = 0;
};

// Ranked edge scores for a query, equal to brute-force scoring of
// graph.edges(). Passing an index avoids rebuilding it per query; it must
// have been built over this graph's edges.
std::vector<std::pair<std::size_t, double>> score_all_edges(const Keywords& query_keywords,
                                                            const Embedding& query_embedding,
                                                            const PassageGraph& graph,
                                                            const HybridIndex* index = nullptr);

} // namespace hopgraph
