#pragma once

// Deterministic random material for property tests. All generation is
// driven by a caller-seeded engine, so every run sees identical fixtures.

#include <random>
#include <string>
#include <vector>

#include "hopgraph/types.hpp"

namespace fixtures {

// Uniform values in [-1, 1]; roughly one vector in twelve is all zeros so
// the zero-vector cosine rule gets exercised.
hopgraph::Embedding random_embedding(std::mt19937& rng, std::size_t dim);

// 0-4 terms from a small fixed vocabulary (empty sets included on purpose).
hopgraph::Keywords random_keywords(std::mt19937& rng);

hopgraph::QueryTriplet random_triplet(std::mt19937& rng, hopgraph::Direction direction,
                                      std::size_t ordinal, std::size_t dim);

// n vertices with ids p00, p01, ... carrying 1-4 out-coming and 1-3
// in-coming triplets plus random passage features.
std::vector<hopgraph::Vertex> random_vertices(std::mt19937& rng, std::size_t n,
                                              std::size_t dim);

} // namespace fixtures
