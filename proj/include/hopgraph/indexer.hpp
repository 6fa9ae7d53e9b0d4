#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hopgraph/graph.hpp"
#include "hopgraph/prompts.hpp"
#include "hopgraph/providers.hpp"
#include "hopgraph/types.hpp"

namespace hopgraph {

struct IndexConfig {
    int min_in_questions = 2;   // answerable by the passage
    int min_out_questions = 4;  // raised but not answerable by it
    int max_questions = 10;     // hard cap per direction
    int retry_limit = 2;        // extra prompts per direction
    int workers = 0;            // 0 = pick from hardware concurrency
    PromptSet prompts = PromptSet::defaults();

    // Above this many candidate in-triplets, edge matching switches from
    // the exact full scan to a dense-similarity prefilter that rescored
    // exactly over the top candidates.
    std::size_t exact_match_limit = 50000;
    int prefilter_candidates = 64;

    void validate() const; // throws ConfigError
};

struct IndexFailure {
    std::string passage_id;
    std::string message;
};

struct QuestionCounts {
    int in_questions = 0;
    int out_questions = 0;
};

struct IndexReport {
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
    double avg_out_degree = 0.0;
    std::size_t llm_calls = 0;
    std::map<std::string, QuestionCounts> question_counts; // per passage id
    std::vector<IndexFailure> failures;                    // kept vertices with problems too
    std::vector<std::string> warnings;
};

// Outcome of prompting one passage for its two question lists.
struct SimulatedQuestions {
    std::vector<std::string> out_questions;
    std::vector<std::string> in_questions;
    std::size_t llm_calls = 0;
    std::vector<std::string> problems; // empty when both minimums were met
};

// Prompts the chat model for out-coming and in-coming questions. Replies
// are split into lines; bullet or number prefixes are stripped; only lines
// ending in '?' count. A reply with malformed lines earns one extra prompt;
// shortfalls are re-prompted up to config.retry_limit, after which the best
// attempt is kept and the problem recorded.
SimulatedQuestions simulate_queries(const Passage& passage, ChatClient& chat,
                                    const IndexConfig& config);

// One triplet per question: extracted keywords + embedding + ordinal.
std::vector<QueryTriplet> build_triplets(const std::vector<std::string>& questions,
                                         Direction direction, Embedder& embedder,
                                         const KeywordExtractor& extractor);

// Matches every out-coming triplet to its best in-coming triplet on another
// vertex (highest hybrid similarity; ties broken by ascending vertex id,
// then ascending triplet ordinal) and returns one directed edge per match,
// sorted by source id then source ordinal. Edges that end up with identical
// features collapse later, when the graph derives its ranked edge view.
std::vector<Edge> merge_edges(const std::vector<Vertex>& vertices,
                              const IndexConfig& config = IndexConfig{});

// Keeps the strongest edges up to the budget for n_vertices (see
// edge_cap_for), ranked by score then canonical identity.
std::vector<Edge> cap_edges(std::vector<Edge> edges, std::size_t n_vertices);

// Full pipeline: question simulation and feature extraction per passage
// (parallel across passages), edge merging, then graph assembly. Passages
// whose providers fail are recorded and skipped; the build aborts only if
// no passage yields its minimum question counts.
std::pair<PassageGraph, IndexReport> build_graph(const std::vector<Passage>& corpus,
                                                 const IndexConfig& config, Embedder& embedder,
                                                 const KeywordExtractor& extractor,
                                                 ChatClient& chat);

// Adds one passage to an existing graph without rescanning old pairs:
// the new vertex's out-triplets match against existing in-triplets, and
// existing matches are revised only where one of the new in-triplets wins.
// The result equals a batch rebuild over the extended corpus.
PassageGraph add_passage(const PassageGraph& graph, const Passage& passage,
                         const IndexConfig& config, Embedder& embedder,
                         const KeywordExtractor& extractor, ChatClient& chat);

// Reads a corpus file with one JSON object per line:
//   {"id": "...", "text": "...", "doc_id": "optional"}
// Duplicate or empty ids and empty texts are rejected with CorpusError.
std::vector<Passage> load_corpus_jsonl(const std::string& path);

} // namespace hopgraph
