#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hopgraph/graph.hpp"
#include "hopgraph/hybrid_index.hpp"
#include "hopgraph/prompts.hpp"
#include "hopgraph/providers.hpp"
#include "hopgraph/types.hpp"

namespace hopgraph {

// A query lifted into the same feature space as edges and passages.
struct QueryRepr {
    std::string raw;
    Keywords keywords;
    Embedding embedding;
};

enum class ReasonerMode {
    Llm,             // ask the chat model to pick a follow-up question
    SimilarityMatch, // pick the out-edge most similar to the query
};

struct TraversalParams {
    int top_k = 20;
    int n_hop = 4;
    ReasonerMode reasoner_mode = ReasonerMode::Llm;
    // When set, a "none" reply still hops to the similarity argmax instead
    // of parking the walk at the current vertex.
    bool force_hop = false;

    void validate() const; // throws ConfigError
};

// Chat dependencies for ReasonerMode::Llm. SimilarityMatch needs neither.
struct Reasoner {
    ChatClient* chat = nullptr;
    const PromptTemplate* prompt = nullptr; // defaults to PromptSet::defaults().reason
};

// ============================================================
// Trace
// ============================================================

struct SeedRecord {
    std::size_t edge_row = 0; // position in graph.edges() or, on the
                              // vertex fallback, in the vertex id order
    std::string source_id;
    std::string target_id;
    std::string question;
    double score = 0.0;
};

struct HopCandidate {
    std::string target_id;
    std::string question;
    double query_sim = 0.0;
};

struct HopRecord {
    std::string from_id;
    std::vector<HopCandidate> candidates;
    // How the step was decided: "llm", "llm_none", "llm_forced",
    // "llm_fallback" (unparseable or out-of-range reply),
    // "provider_fallback" (chat failed), "similarity", "no_out_edges".
    std::string verdict;
    std::string raw_reply;               // LLM reply when one was received
    std::optional<std::string> chosen_target;
    std::optional<std::string> chosen_question;
};

struct RoundRecord {
    std::vector<std::string> frontier; // snapshot before the round ran
    std::vector<HopRecord> hops;
};

struct PruneRecord {
    std::string id;
    double helpfulness = 0.0;
    double query_sim = 0.0;
    double importance = 0.0;
    std::int64_t visits = 0;
};

struct TraversalTrace {
    std::string query;
    int top_k = 0;
    int n_hop = 0;
    std::string reasoner_mode;
    bool seed_fallback_to_passages = false;
    std::vector<SeedRecord> seeds;
    std::vector<RoundRecord> rounds;
    std::vector<PruneRecord> kept; // the pruned context, in rank order
    std::size_t llm_calls = 0;
    std::vector<std::string> warnings;

    std::string to_json() const; // pretty, replayable record of the walk
};

// ============================================================
// Operations
// ============================================================

// Embeds the query and extracts its keywords. Empty queries are rejected.
QueryRepr encode_query(const std::string& query, Embedder& embedder,
                       const KeywordExtractor& extractor);

// Scores every edge against the query and returns the targets of the
// top_k edges, in rank order, duplicates preserved (a target reached by
// several strong edges counts once per edge). On an edgeless graph the
// query is scored against passage features instead and a warning is
// recorded.
std::vector<std::string> initial_retrieve(const QueryRepr& query, const PassageGraph& graph,
                                          const HybridIndex* edge_index, int top_k,
                                          TraversalTrace* trace = nullptr);

// Decides which out-edge to follow from one vertex, or none. In Llm mode
// the chat model sees the query plus the numbered out-edge questions and
// answers with an index or "none"; unparseable and out-of-range replies
// fall back to the similarity argmax, as does a chat failure. Returns a
// pointer into out_edges, or nullptr to stay put.
const Edge* reason_step(const std::vector<Edge>& out_edges, const QueryRepr& query,
                        const TraversalParams& params, const Reasoner& reasoner,
                        HopRecord* record = nullptr, std::size_t* llm_calls = nullptr);

// Seeded multi-round walk. Each round expands a snapshot of the frontier:
// every frontier vertex takes one reasoning step; a chosen target joins
// the visit counts, and joins the next frontier only on first visit.
// Vertices never re-expand once they leave the frontier, so the counter
// holds at most (n_hop + 1) * top_k entries.
VisitCounter traverse(const QueryRepr& query, const PassageGraph& graph,
                      const HybridIndex* edge_index, const TraversalParams& params,
                      const Reasoner& reasoner, TraversalTrace* trace = nullptr);

// Ranks visited passages by helpfulness — the mean of query similarity
// and share of visits — and keeps the best top_k. Ties break toward the
// smaller passage id.
std::vector<Passage> prune(const VisitCounter& counter, const QueryRepr& query,
                           const PassageGraph& graph, int top_k,
                           TraversalTrace* trace = nullptr);

struct RetrievalResult {
    std::vector<Passage> context; // pruned, rank order
    TraversalTrace trace;
};

// encode -> seed -> traverse -> prune, end to end for one query string.
RetrievalResult retrieve(const std::string& query, const PassageGraph& graph,
                         const HybridIndex* edge_index, const TraversalParams& params,
                         Embedder& embedder, const KeywordExtractor& extractor,
                         const Reasoner& reasoner);

} // namespace hopgraph
