#include "support/fixtures.hpp"

#include <cstdio>

namespace fixtures {

using hopgraph::Direction;
using hopgraph::Embedding;
using hopgraph::Keywords;
using hopgraph::QueryTriplet;
using hopgraph::Vertex;

namespace {

const std::vector<std::string> kVocabulary = {
    "alpha", "bravo", "charlie", "delta", "echo",  "foxtrot", "golf",   "hotel",
    "india", "juliet", "kilo",   "lima",  "mike",  "november", "oscar", "papa",
    "quebec", "romeo", "sierra", "tango", "uniform", "victor", "whiskey", "xray",
};

} // namespace

Embedding random_embedding(std::mt19937& rng, std::size_t dim) {
    Embedding e;
    e.values.resize(dim, 0.0f);
    std::uniform_int_distribution<int> zero_roll(0, 11);
    if (zero_roll(rng) == 0) {
        return e;
    }
    std::uniform_real_distribution<float> value(-1.0f, 1.0f);
    for (auto& v : e.values) {
        v = value(rng);
    }
    return e;
}

Keywords random_keywords(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> count(0, 4);
    std::uniform_int_distribution<std::size_t> pick(0, kVocabulary.size() - 1);
    std::vector<std::string> terms;
    std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        terms.push_back(kVocabulary[pick(rng)]);
    }
    return Keywords::of(std::move(terms));
}

QueryTriplet random_triplet(std::mt19937& rng, Direction direction, std::size_t ordinal,
                            std::size_t dim) {
    QueryTriplet t;
    t.question = std::string(direction == Direction::OutComing ? "out" : "in") + " question " +
                 std::to_string(rng() % 1000) + "?";
    t.keywords = random_keywords(rng);
    t.embedding = random_embedding(rng, dim);
    t.direction = direction;
    t.ordinal = ordinal;
    return t;
}

std::vector<Vertex> random_vertices(std::mt19937& rng, std::size_t n, std::size_t dim) {
    std::vector<Vertex> out;
    out.reserve(n);
    std::uniform_int_distribution<std::size_t> out_count(1, 4);
    std::uniform_int_distribution<std::size_t> in_count(1, 3);
    for (std::size_t i = 0; i < n; ++i) {
        Vertex v;
        char id[32];
        std::snprintf(id, sizeof(id), "p%02zu", i);
        v.passage.id = id;
        v.passage.text = "Passage " + std::to_string(i) + " about " +
                         kVocabulary[i % kVocabulary.size()] + ".";
        v.passage.doc_id = "doc" + std::to_string(i / 4);
        std::size_t n_out = out_count(rng);
        for (std::size_t j = 0; j < n_out; ++j) {
            v.out_triplets.push_back(random_triplet(rng, Direction::OutComing, j, dim));
        }
        std::size_t n_in = in_count(rng);
        for (std::size_t j = 0; j < n_in; ++j) {
            v.in_triplets.push_back(random_triplet(rng, Direction::InComing, j, dim));
        }
        v.passage_keywords = random_keywords(rng);
        v.passage_embedding = random_embedding(rng, dim);
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace fixtures
