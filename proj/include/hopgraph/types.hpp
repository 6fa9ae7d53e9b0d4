#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hopgraph/errors.hpp"

namespace hopgraph {

// An atomic text chunk with identity and source provenance.
struct Passage {
    std::string id;
    std::string text;
    std::string doc_id;

    friend bool operator==(const Passage&, const Passage&) = default;
};

// A normalized keyword set: case-folded, deduplicated, no empty members.
// Stored as a sorted vector so intersections and unions are linear merges.
class Keywords {
public:
    Keywords() = default;

    // Normalizes the given terms: lowercase, drop empties, sort, dedupe.
    static Keywords of(std::vector<std::string> terms);

    const std::vector<std::string>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool contains(const std::string& term) const;

    static std::size_t intersection_size(const Keywords& a, const Keywords& b);
    static Keywords union_of(const Keywords& a, const Keywords& b);

    friend bool operator==(const Keywords&, const Keywords&) = default;

private:
    std::vector<std::string> terms_; // sorted, unique, folded
};

// A fixed-length dense vector. The dimension is implied by the value count
// and must match the graph-level dimension everywhere it is used.
struct Embedding {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    bool is_finite() const;

    friend bool operator==(const Embedding&, const Embedding&) = default;
};

enum class Direction { OutComing, InComing };

// A pseudo-query with its keyword set and embedding.
struct QueryTriplet {
    std::string question;
    Keywords keywords;
    Embedding embedding;
    Direction direction = Direction::OutComing;
    std::size_t ordinal = 0; // index within its vertex's triplet list

    friend bool operator==(const QueryTriplet&, const QueryTriplet&) = default;
};

// A passage plus its triplets and passage-level features.
struct Vertex {
    Passage passage;
    std::vector<QueryTriplet> out_triplets;
    std::vector<QueryTriplet> in_triplets;
    Keywords passage_keywords;
    Embedding passage_embedding;

    const std::string& id() const { return passage.id; }

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

// A directed logical link carrying the matched in-coming question, the union
// of both keyword sets, and the in-coming embedding. The ordinals record
// which out-triplet of the source and in-triplet of the target produced it.
struct Edge {
    std::string source_id;
    std::string target_id;
    std::string question;
    Keywords keywords;
    Embedding embedding;
    double sim_score = 0.0;
    std::size_t source_ordinal = 0;
    std::size_t target_ordinal = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Canonical identity order: (source, target, source_ordinal, target_ordinal).
bool edge_identity_less(const Edge& a, const Edge& b);

// Ranking order used for capping and retrieval: sim_score descending,
// ties broken by ascending identity order.
bool edge_rank_less(const Edge& a, const Edge& b);

// Per-vertex visit tally accumulated during traversal.
class VisitCounter {
public:
    void add(const std::string& id, std::int64_t n = 1);
    bool contains(const std::string& id) const;

    // Throws KeyError when the id was never counted.
    std::int64_t count(const std::string& id) const;

    std::int64_t total() const { return total_; }
    std::size_t size() const { return counts_.size(); }
    bool empty() const { return counts_.empty(); }
    const std::map<std::string, std::int64_t>& counts() const { return counts_; }

private:
    std::map<std::string, std::int64_t> counts_;
    std::int64_t total_ = 0;
};

} // namespace hopgraph
