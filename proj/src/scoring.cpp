#include "hopgraph/scoring.hpp"

#include <cmath>

namespace hopgraph {

double jaccard(const Keywords& a, const Keywords& b) {
    const std::size_t inter = Keywords::intersection_size(a, b);
    const std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) {
        return 0.0; // both sets empty
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("cosine: dimension mismatch (" + std::to_string(a.dim()) +
                             " vs " + std::to_string(b.dim()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double x = a.values[i];
        const double y = b.values[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    if (c < 0.0) {
        return 0.0;
    }
    return c > 1.0 ? 1.0 : c;
}

double hybrid_sim(const Keywords& ka, const Embedding& va,
                  const Keywords& kb, const Embedding& vb) {
    return (jaccard(ka, kb) + cosine(va, vb)) / 2.0;
}

double importance(const VisitCounter& counter, const std::string& id) {
    const auto n = counter.count(id);
    return static_cast<double>(n) / static_cast<double>(counter.total());
}

double helpfulness(const Vertex& v, const Keywords& query_keywords,
                   const Embedding& query_embedding, const VisitCounter& counter) {
    const double sim = hybrid_sim(v.passage_keywords, v.passage_embedding,
                                  query_keywords, query_embedding);
    const double imp = importance(counter, v.passage.id);
    return (sim + imp) / 2.0;
}

} // namespace hopgraph
