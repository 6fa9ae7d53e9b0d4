#include "hopgraph/hybrid_index.hpp"

#include <algorithm>
#include <cmath>

#include "hopgraph/errors.hpp"
#include "hopgraph/scoring.hpp"

namespace hopgraph {

void HybridIndex::add(const Keywords& keywords, const Embedding& embedding) {
    if (size() == 0) {
        dim_ = embedding.dim();
    } else if (embedding.dim() != dim_) {
        throw DimensionError("index row dimension " + std::to_string(embedding.dim()) +
                             " does not match " + std::to_string(dim_));
    }
    std::size_t row = size();
    for (const auto& term : keywords.terms()) {
        postings_[term].push_back(row); // rows arrive in ascending order
    }
    keyword_sizes_.push_back(keywords.size());
    dense_.insert(dense_.end(), embedding.values.begin(), embedding.values.end());
    double nb = 0.0;
    for (float v : embedding.values) {
        const double y = v;
        nb += y * y;
    }
    norm_sq_.push_back(nb);
}

std::vector<double> HybridIndex::score_all(const Keywords& query_keywords,
                                           const Embedding& query_embedding) const {
    if (size() > 0 && query_embedding.dim() != dim_) {
        throw DimensionError("query dimension " + std::to_string(query_embedding.dim()) +
                             " does not match index dimension " + std::to_string(dim_));
    }
    const std::size_t n = size();

    std::vector<std::size_t> inter(n, 0);
    for (const auto& term : query_keywords.terms()) {
        auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        for (std::size_t row : it->second) {
            ++inter[row];
        }
    }

    double na = 0.0;
    for (float v : query_embedding.values) {
        const double x = v;
        na += x * x;
    }

    // Mirrors hybrid_sim(query, row) term for term so scores are identical.
    std::vector<double> scores(n, 0.0);
    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t uni = query_keywords.size() + keyword_sizes_[row] - inter[row];
        const double jac = uni == 0 ? 0.0
                                    : static_cast<double>(inter[row]) / static_cast<double>(uni);

        double cos = 0.0;
        const double nb = norm_sq_[row];
        if (na != 0.0 && nb != 0.0) {
            double dot = 0.0;
            const float* base = dense_.data() + row * dim_;
            for (std::size_t i = 0; i < dim_; ++i) {
                const double x = query_embedding.values[i];
                const double y = base[i];
                dot += x * y;
            }
            cos = dot / (std::sqrt(na) * std::sqrt(nb));
            if (cos < 0.0) {
                cos = 0.0;
            } else if (cos > 1.0) {
                cos = 1.0;
            }
        }
        scores[row] = (jac + cos) / 2.0;
    }
    return scores;
}

std::vector<std::pair<std::size_t, double>> HybridIndex::rank_all(
    const Keywords& query_keywords, const Embedding& query_embedding) const {
    std::vector<double> scores = score_all(query_keywords, query_embedding);
    std::vector<std::pair<std::size_t, double>> ranked;
    ranked.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        ranked.emplace_back(i, scores[i]);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    return ranked;
}

HybridIndex HybridIndex::over_edges(const PassageGraph& graph) {
    HybridIndex index;
    for (const Edge& e : graph.edges()) {
        index.add(e.keywords, e.embedding);
    }
    return index;
}

HybridIndex HybridIndex::over_passages(const PassageGraph& graph,
                                       std::vector<std::string>* ids_out) {
    HybridIndex index;
    for (const auto& [id, v] : graph.vertices()) {
        index.add(v.passage_keywords, v.passage_embedding);
        if (ids_out) {
            ids_out->push_back(id);
        }
    }
    return index;
}

std::vector<std::pair<std::size_t, double>> score_all_edges(const Keywords& query_keywords,
                                                            const Embedding& query_embedding,
                                                            const PassageGraph& graph,
                                                            const HybridIndex* index) {
    if (index != nullptr) {
        if (index->size() != graph.edges().size()) {
            throw Error("edge index is stale: " + std::to_string(index->size()) +
                        " rows for " + std::to_string(graph.edges().size()) + " edges");
        }
        return index->rank_all(query_keywords, query_embedding);
    }
    HybridIndex fresh = HybridIndex::over_edges(graph);
    return fresh.rank_all(query_keywords, query_embedding);
}

} // namespace hopgraph
