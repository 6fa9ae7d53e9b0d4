#include "hopgraph/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace hopgraph {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
    fnv_bytes(h, &v, sizeof(v));
}

void fnv_string(std::uint64_t& h, const std::string& s) {
    fnv_u64(h, s.size());
    fnv_bytes(h, s.data(), s.size());
}

void fnv_keywords(std::uint64_t& h, const Keywords& k) {
    fnv_u64(h, k.size());
    for (const auto& t : k.terms()) {
        fnv_string(h, t);
    }
}

void fnv_embedding(std::uint64_t& h, const Embedding& e) {
    fnv_u64(h, e.dim());
    for (float v : e.values) {
        fnv_u64(h, std::bit_cast<std::uint32_t>(v));
    }
}

void fnv_triplet(std::uint64_t& h, const QueryTriplet& t) {
    fnv_string(h, t.question);
    fnv_keywords(h, t.keywords);
    fnv_embedding(h, t.embedding);
    fnv_u64(h, t.direction == Direction::OutComing ? 0 : 1);
    fnv_u64(h, static_cast<std::uint64_t>(t.ordinal));
}

void fnv_edge(std::uint64_t& h, const Edge& e) {
    fnv_string(h, e.source_id);
    fnv_string(h, e.target_id);
    fnv_string(h, e.question);
    fnv_keywords(h, e.keywords);
    fnv_embedding(h, e.embedding);
    fnv_u64(h, std::bit_cast<std::uint64_t>(e.sim_score));
    fnv_u64(h, static_cast<std::uint64_t>(e.source_ordinal));
    fnv_u64(h, static_cast<std::uint64_t>(e.target_ordinal));
}

// Feature identity used for deduplication of capped edges.
bool same_feature(const Edge& a, const Edge& b) {
    return a.source_id == b.source_id && a.target_id == b.target_id &&
           a.question == b.question && a.keywords == b.keywords &&
           a.embedding == b.embedding && a.sim_score == b.sim_score;
}

} // namespace

PassageGraph::PassageGraph(std::vector<Vertex> vertices, std::vector<Edge> candidates,
                           std::size_t dim, std::size_t edge_cap)
    : candidates_(std::move(candidates)), dim_(dim), edge_cap_(edge_cap) {
    for (auto& v : vertices) {
        const std::string id = v.id();
        if (id.empty()) {
            throw Error("graph: passage id must be non-empty");
        }
        if (!vertices_.emplace(id, std::move(v)).second) {
            throw IdConflictError("graph: duplicate passage id '" + id + "'");
        }
    }
    validate();
    derive_capped_view();
}

const Vertex& PassageGraph::vertex(const std::string& id) const {
    auto it = vertices_.find(id);
    if (it == vertices_.end()) {
        throw KeyError("graph has no vertex '" + id + "'");
    }
    return it->second;
}

const std::vector<Edge>& PassageGraph::out_edges(const std::string& id) const {
    static const std::vector<Edge> kEmpty;
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? kEmpty : it->second;
}

void PassageGraph::validate() const {
    for (const auto& [id, v] : vertices_) {
        if (v.passage.text.empty()) {
            throw Error("graph: passage '" + id + "' has empty text");
        }
        if (v.passage_embedding.dim() != dim_) {
            throw DimensionError("graph: passage embedding of '" + id + "' has dim " +
                                 std::to_string(v.passage_embedding.dim()) + ", expected " +
                                 std::to_string(dim_));
        }
        for (const auto* list : {&v.out_triplets, &v.in_triplets}) {
            for (const auto& t : *list) {
                if (t.embedding.dim() != dim_) {
                    throw DimensionError("graph: triplet embedding in '" + id +
                                         "' has dim " + std::to_string(t.embedding.dim()) +
                                         ", expected " + std::to_string(dim_));
                }
            }
        }
    }
    for (const auto& e : candidates_) {
        if (e.source_id == e.target_id) {
            throw Error("graph: self-loop edge on '" + e.source_id + "'");
        }
        if (!has_vertex(e.source_id) || !has_vertex(e.target_id)) {
            throw KeyError("graph: edge endpoint missing (" + e.source_id + " -> " +
                           e.target_id + ")");
        }
        if (e.embedding.dim() != dim_) {
            throw DimensionError("graph: edge embedding has dim " +
                                 std::to_string(e.embedding.dim()) + ", expected " +
                                 std::to_string(dim_));
        }
    }
}

void PassageGraph::derive_capped_view() {
    std::vector<Edge> ranked = candidates_;
    std::sort(ranked.begin(), ranked.end(), edge_rank_less);

    // Identical-feature duplicates (same pair matched through equal-keyword
    // out-triplets) collapse to the lowest-ordinal survivor. Rank order keeps
    // duplicates inside one contiguous (score, source, target) run, so the
    // backward scan stops at the run boundary.
    std::vector<Edge> deduped;
    deduped.reserve(ranked.size());
    for (auto& e : ranked) {
        bool dup = false;
        for (auto it = deduped.rbegin(); it != deduped.rend(); ++it) {
            if (it->sim_score != e.sim_score || it->source_id != e.source_id ||
                it->target_id != e.target_id) {
                break;
            }
            if (same_feature(*it, e)) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            deduped.push_back(std::move(e));
        }
    }

    if (deduped.size() > edge_cap_) {
        deduped.resize(edge_cap_);
    }
    edges_ = std::move(deduped);

    adjacency_.clear();
    for (const auto& e : edges_) {
        adjacency_[e.source_id].push_back(e);
    }
    for (auto& [id, list] : adjacency_) {
        std::sort(list.begin(), list.end(), edge_rank_less);
    }
}

std::uint64_t PassageGraph::fingerprint() const {
    std::uint64_t h = kFnvOffset;
    fnv_u64(h, dim_);
    fnv_u64(h, edge_cap_);
    fnv_u64(h, vertices_.size());
    for (const auto& [id, v] : vertices_) {
        fnv_string(h, v.passage.id);
        fnv_string(h, v.passage.text);
        fnv_string(h, v.passage.doc_id);
        fnv_keywords(h, v.passage_keywords);
        fnv_embedding(h, v.passage_embedding);
        fnv_u64(h, v.out_triplets.size());
        for (const auto& t : v.out_triplets) {
            fnv_triplet(h, t);
        }
        fnv_u64(h, v.in_triplets.size());
        for (const auto& t : v.in_triplets) {
            fnv_triplet(h, t);
        }
    }
    fnv_u64(h, edges_.size());
    for (const auto& e : edges_) {
        fnv_edge(h, e);
    }
    return h;
}

std::size_t edge_cap_for(std::size_t n_vertices) {
    if (n_vertices <= 1) {
        return 0;
    }
    std::size_t log2_ceil = 0;
    std::size_t power = 1;
    while (power < n_vertices) {
        power *= 2;
        ++log2_ceil;
    }
    return n_vertices * log2_ceil;
}

} // namespace hopgraph
