#include "hopgraph/indexer.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <numeric>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "hopgraph/scoring.hpp"
#include "json.hpp"

namespace hopgraph {

namespace {

// ============================================================
// Reply parsing
// ============================================================

struct ParsedReply {
    std::vector<std::string> questions;
    bool had_invalid = false;
};

std::string strip_line(const std::string& raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) {
        --end;
    }
    std::string line = raw.substr(begin, end - begin);

    // Drop a leading bullet ("- ", "* ") or enumeration ("3.", "12)", "4:").
    if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
        line.erase(0, 2);
    } else {
        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > 0 && i < line.size() &&
            (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
            line.erase(0, i + 1);
        }
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
        line.erase(line.begin());
    }
    return line;
}

ParsedReply parse_question_lines(const std::string& reply) {
    ParsedReply out;
    std::unordered_set<std::string> seen;
    std::size_t start = 0;
    while (start <= reply.size()) {
        std::size_t nl = reply.find('\n', start);
        std::string raw = reply.substr(start, nl == std::string::npos ? nl : nl - start);
        start = nl == std::string::npos ? reply.size() + 1 : nl + 1;

        std::string line = strip_line(raw);
        if (line.empty()) {
            continue;
        }
        if (line.back() != '?') {
            out.had_invalid = true;
            continue;
        }
        if (seen.insert(line).second) {
            out.questions.push_back(std::move(line));
        }
    }
    return out;
}

struct DirectionOutcome {
    std::vector<std::string> questions;
    std::size_t calls = 0;
    std::string problem; // empty when the minimum was met
};

DirectionOutcome run_direction(const Passage& passage, ChatClient& chat,
                               const PromptTemplate& tmpl, const char* label, int min_count,
                               int max_count, int retry_limit) {
    std::string prompt = tmpl.render({{"passage", passage.text},
                                      {"min_questions", std::to_string(min_count)}});
    DirectionOutcome out;
    int max_attempts = retry_limit + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        std::string reply = chat.chat(prompt);
        ++out.calls;
        ParsedReply parsed = parse_question_lines(reply);
        if (parsed.questions.size() > out.questions.size()) {
            out.questions = std::move(parsed.questions);
        }
        bool enough = static_cast<int>(out.questions.size()) >= min_count;
        // Malformed lines in the first reply earn one recovery prompt;
        // after that they are simply dropped.
        bool recover = parsed.had_invalid && attempt == 1 && attempt < max_attempts;
        if (enough && !recover) {
            break;
        }
    }
    if (static_cast<int>(out.questions.size()) > max_count) {
        out.questions.resize(static_cast<std::size_t>(max_count));
    }
    if (static_cast<int>(out.questions.size()) < min_count) {
        out.problem = std::string(label) + ": " + std::to_string(out.questions.size()) +
                      " valid question(s) after " + std::to_string(out.calls) +
                      " prompt(s), minimum is " + std::to_string(min_count);
    }
    return out;
}

// ============================================================
// Edge matching
// ============================================================

struct InRef {
    const Vertex* vertex;
    const QueryTriplet* triplet;
    std::size_t ordinal;
};

std::vector<InRef> collect_in_refs(const std::vector<const Vertex*>& vertices) {
    std::vector<InRef> pool;
    for (const Vertex* v : vertices) {
        for (std::size_t i = 0; i < v->in_triplets.size(); ++i) {
            pool.push_back({v, &v->in_triplets[i], i});
        }
    }
    std::sort(pool.begin(), pool.end(), [](const InRef& a, const InRef& b) {
        return std::tie(a.vertex->passage.id, a.ordinal) <
               std::tie(b.vertex->passage.id, b.ordinal);
    });
    return pool;
}

Edge make_edge(const std::string& source_id, const QueryTriplet& out_t, std::size_t out_ordinal,
               const std::string& target_id, const QueryTriplet& in_t, std::size_t in_ordinal,
               double score) {
    Edge e;
    e.source_id = source_id;
    e.target_id = target_id;
    e.question = in_t.question;
    e.keywords = Keywords::union_of(out_t.keywords, in_t.keywords);
    e.embedding = in_t.embedding;
    e.sim_score = score;
    e.source_ordinal = out_ordinal;
    e.target_ordinal = in_ordinal;
    return e;
}

struct BestMatch {
    const InRef* ref = nullptr;
    double score = 0.0;
};

// Exact argmax over the pool; the pool is sorted ascending by (vertex id,
// ordinal), so a strict '>' keeps the first best and realizes the tie rule.
BestMatch best_over_pool(const QueryTriplet& out_t, const std::vector<InRef>& pool,
                         const std::string& skip_vertex_id) {
    BestMatch best;
    for (const InRef& ref : pool) {
        if (ref.vertex->passage.id == skip_vertex_id) {
            continue;
        }
        double s = hybrid_sim(out_t.keywords, out_t.embedding, ref.triplet->keywords,
                              ref.triplet->embedding);
        if (best.ref == nullptr || s > best.score) {
            best = {&ref, s};
        }
    }
    return best;
}

// Dense-similarity prefilter for large pools: rank by cosine, keep the top
// candidates, then rescore those exactly. An approximation by design — a
// match whose strength is carried mostly by keyword overlap can be missed.
BestMatch best_with_prefilter(const QueryTriplet& out_t, const std::vector<InRef>& pool,
                              const std::string& skip_vertex_id, int keep) {
    std::vector<std::size_t> idx;
    idx.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].vertex->passage.id != skip_vertex_id) {
            idx.push_back(i);
        }
    }
    std::vector<double> cos(pool.size(), 0.0);
    for (std::size_t i : idx) {
        cos[i] = cosine(out_t.embedding, pool[i].triplet->embedding);
    }
    std::size_t n_keep = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(keep));
    std::partial_sort(idx.begin(), idx.begin() + n_keep, idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (cos[a] != cos[b]) {
                              return cos[a] > cos[b];
                          }
                          return a < b;
                      });
    idx.resize(n_keep);
    std::sort(idx.begin(), idx.end()); // ascending (id, ordinal) for the tie rule

    BestMatch best;
    for (std::size_t i : idx) {
        double s = hybrid_sim(out_t.keywords, out_t.embedding, pool[i].triplet->keywords,
                              pool[i].triplet->embedding);
        if (best.ref == nullptr || s > best.score) {
            best = {&pool[i], s};
        }
    }
    return best;
}

} // namespace

// ============================================================
// Config
// ============================================================

void IndexConfig::validate() const {
    if (min_in_questions < 1 || min_out_questions < 1) {
        throw ConfigError("question minimums must be at least 1");
    }
    if (max_questions < std::max(min_in_questions, min_out_questions)) {
        throw ConfigError("max_questions must not be below the question minimums");
    }
    if (retry_limit < 0) {
        throw ConfigError("retry_limit must be non-negative");
    }
    if (workers < 0) {
        throw ConfigError("workers must be non-negative");
    }
    if (prefilter_candidates < 1) {
        throw ConfigError("prefilter_candidates must be positive");
    }
}

// ============================================================
// Simulation and triplets
// ============================================================

SimulatedQuestions simulate_queries(const Passage& passage, ChatClient& chat,
                                    const IndexConfig& config) {
    config.validate();
    if (passage.text.empty()) {
        throw CorpusError("passage '" + passage.id + "' has empty text");
    }
    SimulatedQuestions out;

    DirectionOutcome outgoing =
        run_direction(passage, chat, config.prompts.outgoing, "out-coming",
                      config.min_out_questions, config.max_questions, config.retry_limit);
    DirectionOutcome incoming =
        run_direction(passage, chat, config.prompts.incoming, "in-coming",
                      config.min_in_questions, config.max_questions, config.retry_limit);

    out.out_questions = std::move(outgoing.questions);
    out.in_questions = std::move(incoming.questions);
    out.llm_calls = outgoing.calls + incoming.calls;
    if (!outgoing.problem.empty()) {
        out.problems.push_back(std::move(outgoing.problem));
    }
    if (!incoming.problem.empty()) {
        out.problems.push_back(std::move(incoming.problem));
    }
    return out;
}

std::vector<QueryTriplet> build_triplets(const std::vector<std::string>& questions,
                                         Direction direction, Embedder& embedder,
                                         const KeywordExtractor& extractor) {
    std::vector<QueryTriplet> out;
    out.reserve(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
        QueryTriplet t;
        t.question = questions[i];
        t.keywords = extractor.extract(questions[i]);
        t.embedding = embedder.embed(questions[i]);
        t.direction = direction;
        t.ordinal = i;
        out.push_back(std::move(t));
    }
    return out;
}

// ============================================================
// Edge merging and capping
// ============================================================

std::vector<Edge> merge_edges(const std::vector<Vertex>& vertices, const IndexConfig& config) {
    std::vector<const Vertex*> refs;
    refs.reserve(vertices.size());
    for (const Vertex& v : vertices) {
        refs.push_back(&v);
    }
    std::sort(refs.begin(), refs.end(),
              [](const Vertex* a, const Vertex* b) { return a->passage.id < b->passage.id; });

    std::vector<InRef> pool = collect_in_refs(refs);
    bool use_prefilter = pool.size() > config.exact_match_limit;

    std::vector<Edge> edges;
    for (const Vertex* v : refs) {
        for (std::size_t j = 0; j < v->out_triplets.size(); ++j) {
            const QueryTriplet& out_t = v->out_triplets[j];
            BestMatch best =
                use_prefilter
                    ? best_with_prefilter(out_t, pool, v->passage.id,
                                          config.prefilter_candidates)
                    : best_over_pool(out_t, pool, v->passage.id);
            if (best.ref == nullptr) {
                continue; // no other vertex offers an in-coming triplet
            }
            edges.push_back(make_edge(v->passage.id, out_t, j, best.ref->vertex->passage.id,
                                      *best.ref->triplet, best.ref->ordinal, best.score));
        }
    }
    return edges;
}

std::vector<Edge> cap_edges(std::vector<Edge> edges, std::size_t n_vertices) {
    std::sort(edges.begin(), edges.end(), edge_rank_less);
    std::size_t cap = edge_cap_for(n_vertices);
    if (edges.size() > cap) {
        edges.resize(cap);
    }
    return edges;
}

// ============================================================
// Graph assembly
// ============================================================

namespace {

struct PassageOutcome {
    bool built = false;
    bool succeeded = false; // built and both question minimums met
    Vertex vertex;
    std::size_t llm_calls = 0;
    std::vector<std::string> problems;
};

PassageOutcome process_passage(const Passage& passage, const IndexConfig& config,
                               Embedder& embedder, const KeywordExtractor& extractor,
                               ChatClient& chat) {
    PassageOutcome out;
    try {
        SimulatedQuestions sim = simulate_queries(passage, chat, config);
        out.llm_calls = sim.llm_calls;
        out.problems = sim.problems;

        Vertex v;
        v.passage = passage;
        v.out_triplets = build_triplets(sim.out_questions, Direction::OutComing, embedder,
                                        extractor);
        v.in_triplets = build_triplets(sim.in_questions, Direction::InComing, embedder,
                                       extractor);
        v.passage_keywords = extractor.extract(passage.text);
        v.passage_embedding = embedder.embed(passage.text);
        out.vertex = std::move(v);
        out.built = true;
        out.succeeded = out.problems.empty();
    } catch (const std::exception& e) {
        out.built = false;
        out.succeeded = false;
        out.problems.push_back(e.what());
    }
    return out;
}

void check_corpus(const std::vector<Passage>& corpus) {
    if (corpus.empty()) {
        throw CorpusError("corpus is empty");
    }
    std::unordered_set<std::string> ids;
    for (const Passage& p : corpus) {
        if (p.id.empty()) {
            throw CorpusError("corpus contains a passage with an empty id");
        }
        if (p.text.empty()) {
            throw CorpusError("passage '" + p.id + "' has empty text");
        }
        if (!ids.insert(p.id).second) {
            throw CorpusError("duplicate passage id: " + p.id);
        }
    }
}

} // namespace

std::pair<PassageGraph, IndexReport> build_graph(const std::vector<Passage>& corpus,
                                                 const IndexConfig& config, Embedder& embedder,
                                                 const KeywordExtractor& extractor,
                                                 ChatClient& chat) {
    config.validate();
    check_corpus(corpus);

    std::size_t n = corpus.size();
    std::vector<PassageOutcome> outcomes(n);

    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                             : std::min<std::size_t>(hw ? hw : 4, 8);
    workers = std::min(workers, n);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            outcomes[i] = process_passage(corpus[i], config, embedder, extractor, chat);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) {
            threads.emplace_back(work);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    IndexReport report;
    std::vector<Vertex> vertices;
    std::size_t successes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        PassageOutcome& o = outcomes[i];
        report.llm_calls += o.llm_calls;
        for (const auto& msg : o.problems) {
            report.failures.push_back({corpus[i].id, msg});
        }
        if (!o.built) {
            continue;
        }
        report.question_counts[corpus[i].id] = {
            static_cast<int>(o.vertex.in_triplets.size()),
            static_cast<int>(o.vertex.out_triplets.size())};
        vertices.push_back(std::move(o.vertex));
        if (o.succeeded) {
            ++successes;
        }
    }

    if (successes == 0) {
        std::string first = report.failures.empty() ? "no details" : report.failures[0].message;
        throw SimulationError("indexing failed for every passage (" + std::to_string(n) +
                              " total); first failure: " + first);
    }

    std::vector<Edge> candidates = merge_edges(vertices, config);
    std::size_t kept = vertices.size();
    PassageGraph graph(std::move(vertices), std::move(candidates), embedder.dim(),
                       edge_cap_for(kept));

    report.vertex_count = graph.vertex_count();
    report.edge_count = graph.edge_count();
    report.avg_out_degree =
        graph.vertex_count() ? static_cast<double>(graph.edge_count()) / graph.vertex_count()
                             : 0.0;
    if (graph.vertex_count() == 1) {
        report.warnings.push_back("single-passage corpus: the graph has no edges");
    } else if (graph.edge_count() == 0) {
        report.warnings.push_back(
            "graph has no edges; retrieval will fall back to passage features");
    }
    return {std::move(graph), std::move(report)};
}

PassageGraph add_passage(const PassageGraph& graph, const Passage& passage,
                         const IndexConfig& config, Embedder& embedder,
                         const KeywordExtractor& extractor, ChatClient& chat) {
    config.validate();
    if (passage.id.empty()) {
        throw CorpusError("passage id must not be empty");
    }
    if (passage.text.empty()) {
        throw CorpusError("passage '" + passage.id + "' has empty text");
    }
    if (graph.has_vertex(passage.id)) {
        throw IdConflictError("passage id already in graph: " + passage.id);
    }
    if (embedder.dim() != graph.dim()) {
        throw DimensionError("embedder dimension " + std::to_string(embedder.dim()) +
                             " does not match graph dimension " + std::to_string(graph.dim()));
    }

    SimulatedQuestions sim = simulate_queries(passage, chat, config);
    if (!sim.problems.empty()) {
        throw SimulationError("passage '" + passage.id + "': " + sim.problems[0]);
    }

    Vertex nv;
    nv.passage = passage;
    nv.out_triplets = build_triplets(sim.out_questions, Direction::OutComing, embedder,
                                     extractor);
    nv.in_triplets = build_triplets(sim.in_questions, Direction::InComing, embedder, extractor);
    nv.passage_keywords = extractor.extract(passage.text);
    nv.passage_embedding = embedder.embed(passage.text);

    // Existing in-triplets, ascending (vertex id, ordinal).
    std::vector<const Vertex*> old_refs;
    for (const auto& [id, v] : graph.vertices()) {
        old_refs.push_back(&v);
    }
    std::vector<InRef> old_pool = collect_in_refs(old_refs);

    std::vector<Edge> candidates;

    // The new vertex's out-triplets match against the existing pool only
    // (its own in-triplets are excluded by the no-self-loop rule).
    for (std::size_t j = 0; j < nv.out_triplets.size(); ++j) {
        BestMatch best = best_over_pool(nv.out_triplets[j], old_pool, nv.passage.id);
        if (best.ref != nullptr) {
            candidates.push_back(make_edge(nv.passage.id, nv.out_triplets[j], j,
                                           best.ref->vertex->passage.id, *best.ref->triplet,
                                           best.ref->ordinal, best.score));
        }
    }

    // Existing out-triplets keep their match unless one of the new vertex's
    // in-triplets beats it under the same (score, id, ordinal) rule.
    std::map<std::pair<std::string, std::size_t>, const Edge*> existing;
    for (const Edge& e : graph.candidate_edges()) {
        existing[{e.source_id, e.source_ordinal}] = &e;
    }
    for (const auto& [id, v] : graph.vertices()) {
        for (std::size_t j = 0; j < v.out_triplets.size(); ++j) {
            const QueryTriplet& out_t = v.out_triplets[j];

            std::size_t best_i = nv.in_triplets.size();
            double best_s = 0.0;
            for (std::size_t i = 0; i < nv.in_triplets.size(); ++i) {
                double s = hybrid_sim(out_t.keywords, out_t.embedding,
                                      nv.in_triplets[i].keywords, nv.in_triplets[i].embedding);
                if (best_i == nv.in_triplets.size() || s > best_s) {
                    best_i = i;
                    best_s = s;
                }
            }
            bool has_challenger = best_i < nv.in_triplets.size();

            auto it = existing.find({id, j});
            if (it == existing.end()) {
                // The old graph offered no match (e.g. it had one vertex);
                // the new vertex is the only candidate.
                if (has_challenger) {
                    candidates.push_back(make_edge(id, out_t, j, nv.passage.id,
                                                   nv.in_triplets[best_i], best_i, best_s));
                }
                continue;
            }

            const Edge& old = *it->second;
            bool take_new =
                has_challenger &&
                (best_s > old.sim_score ||
                 (best_s == old.sim_score && std::tie(nv.passage.id, best_i) <
                                                 std::tie(old.target_id, old.target_ordinal)));
            if (take_new) {
                candidates.push_back(make_edge(id, out_t, j, nv.passage.id,
                                               nv.in_triplets[best_i], best_i, best_s));
            } else {
                candidates.push_back(old);
            }
        }
    }

    std::vector<Vertex> vertices;
    vertices.reserve(graph.vertex_count() + 1);
    for (const auto& [id, v] : graph.vertices()) {
        vertices.push_back(v);
    }
    vertices.push_back(std::move(nv));

    return PassageGraph(std::move(vertices), std::move(candidates), graph.dim(),
                        edge_cap_for(vertices.size()));
}

// ============================================================
// Corpus loading
// ============================================================

std::vector<Passage> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CorpusError("cannot open corpus file: " + path);
    }
    std::vector<Passage> corpus;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": invalid JSON: " +
                              e.what());
        }
        Passage p;
        try {
            p.id = doc.at("id").get<std::string>();
            p.text = doc.at("text").get<std::string>();
            p.doc_id = doc.value("doc_id", std::string{});
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(path + ":" + std::to_string(line_no) +
                              ": passage needs string fields 'id' and 'text': " + e.what());
        }
        if (p.id.empty()) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": empty passage id");
        }
        if (p.text.empty()) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": empty passage text");
        }
        if (!ids.insert(p.id).second) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": duplicate passage id: " +
                              p.id);
        }
        corpus.push_back(std::move(p));
    }
    if (corpus.empty()) {
        throw CorpusError("corpus file has no passages: " + path);
    }
    return corpus;
}

} // namespace hopgraph
