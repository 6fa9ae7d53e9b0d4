#include "hopgraph/types.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "hopgraph/text.hpp"

namespace hopgraph {

Keywords Keywords::of(std::vector<std::string> terms) {
    Keywords out;
    out.terms_.reserve(terms.size());
    for (auto& t : terms) {
        if (t.empty()) {
            continue;
        }
        out.terms_.push_back(fold_case(std::move(t)));
    }
    std::sort(out.terms_.begin(), out.terms_.end());
    out.terms_.erase(std::unique(out.terms_.begin(), out.terms_.end()), out.terms_.end());
    return out;
}

bool Keywords::contains(const std::string& term) const {
    return std::binary_search(terms_.begin(), terms_.end(), term);
}

std::size_t Keywords::intersection_size(const Keywords& a, const Keywords& b) {
    std::size_t n = 0;
    auto ia = a.terms_.begin();
    auto ib = b.terms_.begin();
    while (ia != a.terms_.end() && ib != b.terms_.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

Keywords Keywords::union_of(const Keywords& a, const Keywords& b) {
    Keywords out;
    std::set_union(a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end(),
                   std::back_inserter(out.terms_));
    return out;
}

bool Embedding::is_finite() const {
    for (float v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

bool edge_identity_less(const Edge& a, const Edge& b) {
    return std::tie(a.source_id, a.target_id, a.source_ordinal, a.target_ordinal) <
           std::tie(b.source_id, b.target_id, b.source_ordinal, b.target_ordinal);
}

bool edge_rank_less(const Edge& a, const Edge& b) {
    if (a.sim_score != b.sim_score) {
        return a.sim_score > b.sim_score;
    }
    return edge_identity_less(a, b);
}

void VisitCounter::add(const std::string& id, std::int64_t n) {
    counts_[id] += n;
    total_ += n;
}

bool VisitCounter::contains(const std::string& id) const {
    return counts_.count(id) != 0;
}

std::int64_t VisitCounter::count(const std::string& id) const {
    auto it = counts_.find(id);
    if (it == counts_.end()) {
        throw KeyError("visit counter has no entry for '" + id + "'");
    }
    return it->second;
}

} // namespace hopgraph
