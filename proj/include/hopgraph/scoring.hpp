#pragma once

#include <string>

#include "hopgraph/types.hpp"

namespace hopgraph {

// Lexical overlap |a ∩ b| / |a ∪ b|. Two empty sets score 0: absence of
// lexical evidence is not a match, the dense term still contributes.
double jaccard(const Keywords& a, const Keywords& b);

// Cosine similarity clamped into [0, 1]. A zero vector on either side
// scores 0. Throws DimensionError on mismatched dimensions.
double cosine(const Embedding& a, const Embedding& b);

// Arithmetic mean of jaccard and cosine over a (keywords, embedding) pair.
double hybrid_sim(const Keywords& ka, const Embedding& va,
                  const Keywords& kb, const Embedding& vb);

// Normalized number of visits: counts[id] / total. Throws KeyError when the
// id was never counted.
double importance(const VisitCounter& counter, const std::string& id);

// Mean of the passage-level hybrid similarity to the query and the vertex's
// normalized visit importance.
double helpfulness(const Vertex& v, const Keywords& query_keywords,
                   const Embedding& query_embedding, const VisitCounter& counter);

} // namespace hopgraph
