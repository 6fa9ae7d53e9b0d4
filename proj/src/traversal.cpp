#include "hopgraph/traversal.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "hopgraph/scoring.hpp"
#include "json.hpp"

namespace hopgraph {

namespace {

const PromptTemplate& default_reason_prompt() {
    static const PromptTemplate tmpl = PromptSet::defaults().reason;
    return tmpl;
}

// Reply parsing: an explicit "none" stays put; otherwise the first
// unsigned integer in the reply is the 1-based question choice.
struct ParsedChoice {
    bool is_none = false;
    bool has_index = false;
    std::size_t index = 0; // 1-based
};

ParsedChoice parse_choice(const std::string& reply) {
    ParsedChoice out;
    std::string folded;
    folded.reserve(reply.size());
    for (char c : reply) {
        folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    // "none" counts only as a whole word, so "none of these help" matches
    // but a question about "nonesuch" does not.
    for (std::size_t at = folded.find("none"); at != std::string::npos;
         at = folded.find("none", at + 1)) {
        bool left_ok = at == 0 || !std::isalnum(static_cast<unsigned char>(folded[at - 1]));
        std::size_t after = at + 4;
        bool right_ok =
            after >= folded.size() || !std::isalnum(static_cast<unsigned char>(folded[after]));
        if (left_ok && right_ok) {
            out.is_none = true;
            return out;
        }
    }
    for (std::size_t i = 0; i < reply.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(reply[i]))) {
            std::size_t value = 0;
            while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) {
                value = value * 10 + static_cast<std::size_t>(reply[i] - '0');
                if (value > 1000000) {
                    break; // plainly out of range; avoid overflow
                }
                ++i;
            }
            out.has_index = true;
            out.index = value;
            return out;
        }
    }
    return out;
}

// Query similarity of each out-edge, in out_edges order.
std::vector<double> edge_query_sims(const std::vector<Edge>& out_edges, const QueryRepr& query) {
    std::vector<double> sims;
    sims.reserve(out_edges.size());
    for (const Edge& e : out_edges) {
        sims.push_back(hybrid_sim(query.keywords, query.embedding, e.keywords, e.embedding));
    }
    return sims;
}

// Highest query similarity; ties go to the smaller (target id, target
// ordinal, source ordinal) so the choice never depends on edge order.
std::size_t similarity_argmax(const std::vector<Edge>& out_edges,
                              const std::vector<double>& sims) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < out_edges.size(); ++i) {
        if (sims[i] > sims[best]) {
            best = i;
            continue;
        }
        if (sims[i] == sims[best]) {
            const Edge& a = out_edges[i];
            const Edge& b = out_edges[best];
            if (std::tie(a.target_id, a.target_ordinal, a.source_ordinal) <
                std::tie(b.target_id, b.target_ordinal, b.source_ordinal)) {
                best = i;
            }
        }
    }
    return best;
}

std::string numbered_questions(const std::vector<Edge>& out_edges) {
    std::string out;
    for (std::size_t i = 0; i < out_edges.size(); ++i) {
        out += std::to_string(i + 1);
        out += ". ";
        out += out_edges[i].question;
        if (i + 1 < out_edges.size()) {
            out.push_back('\n');
        }
    }
    return out;
}

} // namespace

void TraversalParams::validate() const {
    if (top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }
    if (n_hop < 0) {
        throw ConfigError("n_hop must be non-negative");
    }
}

// ============================================================
// encode / seed
// ============================================================

QueryRepr encode_query(const std::string& query, Embedder& embedder,
                       const KeywordExtractor& extractor) {
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error("query must not be empty");
    }
    QueryRepr out;
    out.raw = query;
    out.keywords = extractor.extract(query);
    out.embedding = embedder.embed(query);
    return out;
}

std::vector<std::string> initial_retrieve(const QueryRepr& query, const PassageGraph& graph,
                                          const HybridIndex* edge_index, int top_k,
                                          TraversalTrace* trace) {
    if (top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }
    std::vector<std::string> seeds;

    if (!graph.edges().empty()) {
        auto ranked = score_all_edges(query.keywords, query.embedding, graph, edge_index);
        std::size_t take = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(top_k));
        for (std::size_t i = 0; i < take; ++i) {
            const Edge& e = graph.edges()[ranked[i].first];
            seeds.push_back(e.target_id);
            if (trace) {
                trace->seeds.push_back(
                    {ranked[i].first, e.source_id, e.target_id, e.question, ranked[i].second});
            }
        }
        return seeds;
    }

    // Edgeless graph: score the passages themselves.
    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& [id, v] : graph.vertices()) {
        ranked.emplace_back(id, hybrid_sim(query.keywords, query.embedding, v.passage_keywords,
                                           v.passage_embedding));
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    std::size_t take = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(top_k));
    for (std::size_t i = 0; i < take; ++i) {
        seeds.push_back(ranked[i].first);
        if (trace) {
            trace->seeds.push_back({i, ranked[i].first, ranked[i].first, "", ranked[i].second});
        }
    }
    if (trace) {
        trace->seed_fallback_to_passages = true;
        trace->warnings.push_back("graph has no edges; seeded from passage features");
    }
    return seeds;
}

// ============================================================
// reason
// ============================================================

const Edge* reason_step(const std::vector<Edge>& out_edges, const QueryRepr& query,
                        const TraversalParams& params, const Reasoner& reasoner,
                        HopRecord* record, std::size_t* llm_calls) {
    if (out_edges.empty()) {
        if (record) {
            record->verdict = "no_out_edges";
        }
        return nullptr;
    }

    std::vector<double> sims = edge_query_sims(out_edges, query);
    if (record) {
        for (std::size_t i = 0; i < out_edges.size(); ++i) {
            record->candidates.push_back({out_edges[i].target_id, out_edges[i].question,
                                          sims[i]});
        }
    }
    auto choose = [&](std::size_t i, const char* verdict) -> const Edge* {
        if (record) {
            record->verdict = verdict;
            record->chosen_target = out_edges[i].target_id;
            record->chosen_question = out_edges[i].question;
        }
        return &out_edges[i];
    };

    if (params.reasoner_mode == ReasonerMode::SimilarityMatch) {
        return choose(similarity_argmax(out_edges, sims), "similarity");
    }

    if (reasoner.chat == nullptr) {
        throw ConfigError("LLM reasoning requires a chat client");
    }
    const PromptTemplate& tmpl =
        reasoner.prompt != nullptr ? *reasoner.prompt : default_reason_prompt();
    std::string prompt = tmpl.render(
        {{"query", query.raw}, {"numbered_questions", numbered_questions(out_edges)}});

    std::string reply;
    try {
        reply = reasoner.chat->chat(prompt);
        if (llm_calls) {
            ++*llm_calls;
        }
    } catch (const ProviderError& e) {
        if (record) {
            record->raw_reply = std::string("<provider error: ") + e.what() + ">";
        }
        return choose(similarity_argmax(out_edges, sims), "provider_fallback");
    }
    if (record) {
        record->raw_reply = reply;
    }

    ParsedChoice parsed = parse_choice(reply);
    if (parsed.is_none) {
        if (params.force_hop) {
            return choose(similarity_argmax(out_edges, sims), "llm_forced");
        }
        if (record) {
            record->verdict = "llm_none";
        }
        return nullptr;
    }
    if (parsed.has_index && parsed.index >= 1 && parsed.index <= out_edges.size()) {
        return choose(parsed.index - 1, "llm");
    }
    return choose(similarity_argmax(out_edges, sims), "llm_fallback");
}

// ============================================================
// traverse / prune
// ============================================================

VisitCounter traverse(const QueryRepr& query, const PassageGraph& graph,
                      const HybridIndex* edge_index, const TraversalParams& params,
                      const Reasoner& reasoner, TraversalTrace* trace) {
    params.validate();
    if (trace) {
        trace->query = query.raw;
        trace->top_k = params.top_k;
        trace->n_hop = params.n_hop;
        trace->reasoner_mode =
            params.reasoner_mode == ReasonerMode::Llm ? "llm" : "similarity";
    }

    VisitCounter counter;
    std::vector<std::string> frontier;

    // Seeds carry multiplicity into the counts; the frontier holds each
    // vertex once, in first-seen order.
    std::vector<std::string> seeds =
        initial_retrieve(query, graph, edge_index, params.top_k, trace);
    for (const std::string& id : seeds) {
        if (!counter.contains(id)) {
            frontier.push_back(id);
        }
        counter.add(id);
    }

    std::size_t llm_calls = 0;
    for (int round = 0; round < params.n_hop && !frontier.empty(); ++round) {
        RoundRecord round_record;
        round_record.frontier = frontier;

        std::vector<std::string> next_frontier;
        for (const std::string& id : frontier) {
            HopRecord hop;
            hop.from_id = id;
            const Edge* chosen = reason_step(graph.out_edges(id), query, params, reasoner,
                                             trace ? &hop : nullptr, &llm_calls);
            if (chosen != nullptr) {
                if (!counter.contains(chosen->target_id)) {
                    next_frontier.push_back(chosen->target_id);
                }
                counter.add(chosen->target_id);
            }
            if (trace) {
                round_record.hops.push_back(std::move(hop));
            }
        }
        if (trace) {
            trace->rounds.push_back(std::move(round_record));
        }
        frontier = std::move(next_frontier);
    }

    if (trace) {
        trace->llm_calls = llm_calls;
    }
    return counter;
}

std::vector<Passage> prune(const VisitCounter& counter, const QueryRepr& query,
                           const PassageGraph& graph, int top_k, TraversalTrace* trace) {
    if (top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }

    struct Scored {
        const Vertex* vertex;
        double h;
        double sim;
        double imp;
        std::int64_t visits;
    };
    std::vector<Scored> scored;
    for (const auto& [id, visits] : counter.counts()) {
        const Vertex& v = graph.vertex(id);
        double sim = hybrid_sim(v.passage_keywords, v.passage_embedding, query.keywords,
                                query.embedding);
        double imp = importance(counter, id);
        scored.push_back({&v, (sim + imp) / 2.0, sim, imp, visits});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.h != b.h) {
            return a.h > b.h;
        }
        return a.vertex->passage.id < b.vertex->passage.id;
    });
    if (scored.size() > static_cast<std::size_t>(top_k)) {
        scored.resize(static_cast<std::size_t>(top_k));
    }

    std::vector<Passage> context;
    context.reserve(scored.size());
    for (const Scored& s : scored) {
        context.push_back(s.vertex->passage);
        if (trace) {
            trace->kept.push_back({s.vertex->passage.id, s.h, s.sim, s.imp, s.visits});
        }
    }
    return context;
}

RetrievalResult retrieve(const std::string& query, const PassageGraph& graph,
                         const HybridIndex* edge_index, const TraversalParams& params,
                         Embedder& embedder, const KeywordExtractor& extractor,
                         const Reasoner& reasoner) {
    params.validate();
    RetrievalResult result;
    QueryRepr repr = encode_query(query, embedder, extractor);
    VisitCounter counter = traverse(repr, graph, edge_index, params, reasoner, &result.trace);
    if (counter.empty()) {
        result.trace.warnings.push_back("no passages were reached; context is empty");
        return result;
    }
    result.context = prune(counter, repr, graph, params.top_k, &result.trace);
    return result;
}

// ============================================================
// Trace serialization
// ============================================================

std::string TraversalTrace::to_json() const {
    nlohmann::json seeds_json = nlohmann::json::array();
    for (const auto& s : seeds) {
        seeds_json.push_back({{"edge_row", s.edge_row},
                              {"source", s.source_id},
                              {"target", s.target_id},
                              {"question", s.question},
                              {"score", s.score}});
    }

    nlohmann::json rounds_json = nlohmann::json::array();
    for (const auto& r : rounds) {
        nlohmann::json hops = nlohmann::json::array();
        for (const auto& h : r.hops) {
            nlohmann::json candidates = nlohmann::json::array();
            for (const auto& c : h.candidates) {
                candidates.push_back({{"target", c.target_id},
                                      {"question", c.question},
                                      {"query_sim", c.query_sim}});
            }
            nlohmann::json hop = {{"from", h.from_id},
                                  {"verdict", h.verdict},
                                  {"candidates", std::move(candidates)}};
            if (!h.raw_reply.empty()) {
                hop["raw_reply"] = h.raw_reply;
            }
            if (h.chosen_target) {
                hop["chosen_target"] = *h.chosen_target;
                hop["chosen_question"] = h.chosen_question.value_or("");
            }
            hops.push_back(std::move(hop));
        }
        rounds_json.push_back({{"frontier", r.frontier}, {"hops", std::move(hops)}});
    }

    nlohmann::json kept_json = nlohmann::json::array();
    for (const auto& k : kept) {
        kept_json.push_back({{"id", k.id},
                             {"helpfulness", k.helpfulness},
                             {"query_sim", k.query_sim},
                             {"importance", k.importance},
                             {"visits", k.visits}});
    }

    nlohmann::json doc = {{"query", query},
                          {"top_k", top_k},
                          {"n_hop", n_hop},
                          {"reasoner_mode", reasoner_mode},
                          {"seed_fallback_to_passages", seed_fallback_to_passages},
                          {"seeds", std::move(seeds_json)},
                          {"rounds", std::move(rounds_json)},
                          {"kept", std::move(kept_json)},
                          {"llm_calls", llm_calls},
                          {"warnings", warnings}};
    return doc.dump(2);
}

} // namespace hopgraph
