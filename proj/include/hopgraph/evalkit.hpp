#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hopgraph/graph.hpp"
#include "hopgraph/hybrid_index.hpp"
#include "hopgraph/traversal.hpp"

namespace hopgraph {

struct QAExample {
    std::string id;
    std::string question;
    std::vector<std::string> gold_answers;       // at least one
    std::vector<std::string> supporting_ids;     // passage ids that count as relevant
};

struct ExampleResult {
    std::string id;
    std::string question;
    std::vector<std::string> retrieved_ids;
    double retrieval_precision = 0.0;
    double retrieval_recall = 0.0;
    double retrieval_f1 = 0.0;
    std::string prediction;                  // only when generation ran
    std::optional<int> exact_match;          // only when generation ran
    std::optional<double> answer_f1;         // only when generation ran
    std::size_t context_size = 0;
    std::size_t llm_calls = 0;
    std::string error; // non-empty when this example failed and was skipped
};

struct EvalReport {
    std::size_t example_count = 0;   // examples in the dataset
    std::size_t evaluated_count = 0; // examples that completed
    bool generation_enabled = false;
    // Means over completed examples; answer metrics mean over examples
    // where generation ran.
    double retrieval_precision = 0.0;
    double retrieval_recall = 0.0;
    double retrieval_f1 = 0.0;
    double answer_em = 0.0;
    double answer_f1 = 0.0;
    double mean_context_size = 0.0;
    double mean_llm_calls = 0.0;
    int top_k = 0;
    int n_hop = 0;
    std::string reasoner_mode;
    std::vector<ExampleResult> examples;

    std::string to_json() const;  // stable layout, no timestamps
    std::string to_table() const; // fixed-width summary table
};

// Answer normalization shared by the answer metrics: lowercase, strip
// punctuation, drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(const std::string& text);

// 1 when the normalized prediction equals any normalized gold answer.
int exact_match(const std::string& prediction, const std::vector<std::string>& golds);

// Best token-multiset F1 between the prediction and any gold answer.
// Two answers that both normalize to nothing count as a perfect match.
double answer_f1(const std::string& prediction, const std::vector<std::string>& golds);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Set-based precision/recall/F1 of retrieved passage ids against the
// relevant set. An empty relevant set is an EvalInputError.
Prf retrieval_prf(const std::vector<std::string>& retrieved,
                  const std::vector<std::string>& relevant);

// Reads either a JSON object {"examples": [...]} or JSONL with one example
// per line. Each example carries "question", "answers" (or "answer"), and
// optionally "supporting_ids" (alias "supporting_facts") and "id".
std::vector<QAExample> load_dataset(const std::string& path);

// Runs retrieval (and, with a generator, answer generation) over the
// dataset. Per-example failures are recorded on the example and the run
// continues; aggregates cover the examples that completed.
EvalReport run_eval(const std::vector<QAExample>& dataset, const PassageGraph& graph,
                    const HybridIndex* edge_index, const TraversalParams& params,
                    Embedder& embedder, const KeywordExtractor& extractor,
                    const Reasoner& reasoner, ChatClient* generator = nullptr,
                    const PromptTemplate* answer_prompt = nullptr);

} // namespace hopgraph
