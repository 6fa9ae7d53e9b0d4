#include "hopgraph/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "hopgraph/errors.hpp"
#include "json.hpp"

namespace hopgraph {

namespace {

std::vector<std::string> normalized_tokens(const std::string& text) {
    std::istringstream in(normalize_answer(text));
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) {
        tokens.push_back(tok);
    }
    return tokens;
}

double token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) {
        return 1.0;
    }
    if (pred.empty() || gold.empty()) {
        return 0.0;
    }
    std::map<std::string, int> gold_counts;
    for (const auto& t : gold) {
        ++gold_counts[t];
    }
    int overlap = 0;
    for (const auto& t : pred) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) {
        return 0.0;
    }
    double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

QAExample example_from_json(const nlohmann::json& doc, std::size_t position,
                            const std::string& where) {
    QAExample ex;
    try {
        ex.question = doc.at("question").get<std::string>();
        if (doc.contains("answers")) {
            ex.gold_answers = doc.at("answers").get<std::vector<std::string>>();
        } else if (doc.contains("answer")) {
            ex.gold_answers.push_back(doc.at("answer").get<std::string>());
        }
        const char* support_key =
            doc.contains("supporting_ids") ? "supporting_ids"
            : doc.contains("supporting_facts") ? "supporting_facts"
                                               : nullptr;
        if (support_key != nullptr) {
            ex.supporting_ids = doc.at(support_key).get<std::vector<std::string>>();
        }
        ex.id = doc.value("id", "ex" + std::to_string(position));
    } catch (const nlohmann::json::exception& e) {
        throw EvalInputError(where + ": bad example: " + e.what());
    }
    if (ex.question.empty()) {
        throw EvalInputError(where + ": example has an empty question");
    }
    if (ex.gold_answers.empty()) {
        throw EvalInputError(where + ": example needs at least one gold answer");
    }
    return ex;
}

} // namespace

// ============================================================
// Metrics
// ============================================================

std::string normalize_answer(const std::string& text) {
    std::string folded;
    folded.reserve(text.size());
    for (unsigned char c : text) {
        if (std::ispunct(c)) {
            continue;
        }
        folded.push_back(static_cast<char>(std::tolower(c)));
    }

    std::istringstream in(folded);
    std::string word;
    std::string out;
    while (in >> word) {
        if (word == "a" || word == "an" || word == "the") {
            continue;
        }
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += word;
    }
    return out;
}

int exact_match(const std::string& prediction, const std::vector<std::string>& golds) {
    std::string norm = normalize_answer(prediction);
    for (const auto& gold : golds) {
        if (norm == normalize_answer(gold)) {
            return 1;
        }
    }
    return 0;
}

double answer_f1(const std::string& prediction, const std::vector<std::string>& golds) {
    std::vector<std::string> pred = normalized_tokens(prediction);
    double best = 0.0;
    for (const auto& gold : golds) {
        best = std::max(best, token_f1(pred, normalized_tokens(gold)));
    }
    return best;
}

Prf retrieval_prf(const std::vector<std::string>& retrieved,
                  const std::vector<std::string>& relevant) {
    std::unordered_set<std::string> relevant_set(relevant.begin(), relevant.end());
    if (relevant_set.empty()) {
        throw EvalInputError("relevant passage set must not be empty");
    }
    std::unordered_set<std::string> retrieved_set(retrieved.begin(), retrieved.end());
    std::size_t overlap = 0;
    for (const auto& id : retrieved_set) {
        overlap += relevant_set.count(id);
    }

    Prf out;
    if (!retrieved_set.empty()) {
        out.precision = static_cast<double>(overlap) / static_cast<double>(retrieved_set.size());
    }
    out.recall = static_cast<double>(overlap) / static_cast<double>(relevant_set.size());
    if (out.precision + out.recall > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

// ============================================================
// Dataset loading
// ============================================================

std::vector<QAExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw EvalInputError("cannot open dataset: " + path);
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<QAExample> out;
    std::size_t first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        throw EvalInputError("dataset file is empty: " + path);
    }

    // A top-level object holds {"examples": [...]}; anything else is
    // treated as JSONL with one example object per line.
    bool looks_jsonl = true;
    if (content[first] == '{') {
        try {
            nlohmann::json doc = nlohmann::json::parse(content);
            if (doc.contains("examples")) {
                const auto& arr = doc.at("examples");
                for (std::size_t i = 0; i < arr.size(); ++i) {
                    out.push_back(example_from_json(arr[i], i, path));
                }
                looks_jsonl = false;
            }
        } catch (const nlohmann::json::exception&) {
            // fall through to JSONL
        }
    }

    if (looks_jsonl) {
        std::istringstream lines(content);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw EvalInputError(path + ":" + std::to_string(line_no) +
                                     ": invalid JSON: " + e.what());
            }
            out.push_back(
                example_from_json(doc, out.size(), path + ":" + std::to_string(line_no)));
        }
    }

    if (out.empty()) {
        throw EvalInputError("dataset has no examples: " + path);
    }
    return out;
}

// ============================================================
// Evaluation run
// ============================================================

EvalReport run_eval(const std::vector<QAExample>& dataset, const PassageGraph& graph,
                    const HybridIndex* edge_index, const TraversalParams& params,
                    Embedder& embedder, const KeywordExtractor& extractor,
                    const Reasoner& reasoner, ChatClient* generator,
                    const PromptTemplate* answer_prompt) {
    if (dataset.empty()) {
        throw EvalInputError("dataset is empty");
    }
    params.validate();

    PromptTemplate default_answer = PromptSet::defaults().answer;
    const PromptTemplate& answer_tmpl =
        answer_prompt != nullptr ? *answer_prompt : default_answer;

    EvalReport report;
    report.example_count = dataset.size();
    report.generation_enabled = generator != nullptr;
    report.top_k = params.top_k;
    report.n_hop = params.n_hop;
    report.reasoner_mode = params.reasoner_mode == ReasonerMode::Llm ? "llm" : "similarity";

    double sum_p = 0.0;
    double sum_r = 0.0;
    double sum_f1 = 0.0;
    double sum_em = 0.0;
    double sum_af1 = 0.0;
    double sum_ctx = 0.0;
    double sum_calls = 0.0;
    std::size_t generated = 0;

    for (const QAExample& ex : dataset) {
        ExampleResult res;
        res.id = ex.id;
        res.question = ex.question;
        try {
            RetrievalResult r =
                retrieve(ex.question, graph, edge_index, params, embedder, extractor, reasoner);
            for (const Passage& p : r.context) {
                res.retrieved_ids.push_back(p.id);
            }
            res.context_size = r.context.size();
            res.llm_calls = r.trace.llm_calls;

            Prf prf = retrieval_prf(res.retrieved_ids, ex.supporting_ids);
            res.retrieval_precision = prf.precision;
            res.retrieval_recall = prf.recall;
            res.retrieval_f1 = prf.f1;

            if (generator != nullptr) {
                std::string context;
                for (const Passage& p : r.context) {
                    if (!context.empty()) {
                        context += "\n\n";
                    }
                    context += p.text;
                }
                if (context.empty()) {
                    context = "(no passages retrieved)";
                }
                std::string prediction = generator->chat(
                    answer_tmpl.render({{"context", context}, {"query", ex.question}}));
                res.prediction = prediction;
                res.exact_match = exact_match(prediction, ex.gold_answers);
                res.answer_f1 = answer_f1(prediction, ex.gold_answers);
                sum_em += *res.exact_match;
                sum_af1 += *res.answer_f1;
                ++generated;
            }

            sum_p += res.retrieval_precision;
            sum_r += res.retrieval_recall;
            sum_f1 += res.retrieval_f1;
            sum_ctx += static_cast<double>(res.context_size);
            sum_calls += static_cast<double>(res.llm_calls);
            ++report.evaluated_count;
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        report.examples.push_back(std::move(res));
    }

    if (report.evaluated_count > 0) {
        double n = static_cast<double>(report.evaluated_count);
        report.retrieval_precision = sum_p / n;
        report.retrieval_recall = sum_r / n;
        report.retrieval_f1 = sum_f1 / n;
        report.mean_context_size = sum_ctx / n;
        report.mean_llm_calls = sum_calls / n;
    }
    if (generated > 0) {
        report.answer_em = sum_em / static_cast<double>(generated);
        report.answer_f1 = sum_af1 / static_cast<double>(generated);
    }
    return report;
}

// ============================================================
// Report output
// ============================================================

std::string EvalReport::to_json() const {
    nlohmann::json examples_json = nlohmann::json::array();
    for (const auto& ex : examples) {
        nlohmann::json j = {{"id", ex.id},
                            {"question", ex.question},
                            {"retrieved_ids", ex.retrieved_ids},
                            {"retrieval_precision", ex.retrieval_precision},
                            {"retrieval_recall", ex.retrieval_recall},
                            {"retrieval_f1", ex.retrieval_f1},
                            {"context_size", ex.context_size},
                            {"llm_calls", ex.llm_calls}};
        if (ex.exact_match) {
            j["prediction"] = ex.prediction;
            j["exact_match"] = *ex.exact_match;
            j["answer_f1"] = *ex.answer_f1;
        }
        if (!ex.error.empty()) {
            j["error"] = ex.error;
        }
        examples_json.push_back(std::move(j));
    }

    nlohmann::json doc = {
        {"params",
         {{"top_k", top_k}, {"n_hop", n_hop}, {"reasoner_mode", reasoner_mode}}},
        {"aggregates",
         {{"example_count", example_count},
          {"evaluated_count", evaluated_count},
          {"generation_enabled", generation_enabled},
          {"retrieval_precision", retrieval_precision},
          {"retrieval_recall", retrieval_recall},
          {"retrieval_f1", retrieval_f1},
          {"answer_em", answer_em},
          {"answer_f1", answer_f1},
          {"mean_context_size", mean_context_size},
          {"mean_llm_calls", mean_llm_calls}}},
        {"examples", std::move(examples_json)}};
    return doc.dump(2);
}

std::string EvalReport::to_table() const {
    char line[160];
    std::string out;
    out += "                 Answer           Retrieval\n";
    out += "                 EM      F1      P       R       F1      LLM calls  Context\n";
    std::snprintf(line, sizeof(line),
                  "  mean       %6.3f  %6.3f  %6.3f  %6.3f  %6.3f  %9.1f  %7.1f\n",
                  answer_em, answer_f1, retrieval_precision, retrieval_recall, retrieval_f1,
                  mean_llm_calls, mean_context_size);
    out += line;
    std::snprintf(line, sizeof(line),
                  "  examples   %zu evaluated of %zu (top_k=%d, n_hop=%d, reasoner=%s%s)\n",
                  evaluated_count, example_count, top_k, n_hop, reasoner_mode.c_str(),
                  generation_enabled ? ", generation on" : "");
    out += line;
    return out;
}

} // namespace hopgraph
