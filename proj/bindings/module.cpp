// Python bindings for the retrieval engine. The module mirrors the main
// operations: similarity formulas, answer/retrieval metrics, the offline
// and HTTP providers, graph construction, archive round-trips, and the
// retrieve/evaluate entry points. Heavy calls release the GIL so scripted
// Python chat callbacks can run from worker threads.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hopgraph/errors.hpp"
#include "hopgraph/evalkit.hpp"
#include "hopgraph/graph.hpp"
#include "hopgraph/http_provider.hpp"
#include "hopgraph/hybrid_index.hpp"
#include "hopgraph/indexer.hpp"
#include "hopgraph/prompts.hpp"
#include "hopgraph/providers.hpp"
#include "hopgraph/scoring.hpp"
#include "hopgraph/storage.hpp"
#include "hopgraph/traversal.hpp"

namespace py = pybind11;
namespace hg = hopgraph;

namespace {

// ============================================================
// Input conversion
// ============================================================

hg::Passage to_passage(py::handle obj) {
    hg::Passage p;
    if (py::isinstance<py::dict>(obj)) {
        auto d = obj.cast<py::dict>();
        if (d.contains("id")) {
            p.id = d["id"].cast<std::string>();
        }
        if (d.contains("text")) {
            p.text = d["text"].cast<std::string>();
        }
        if (d.contains("doc_id")) {
            p.doc_id = d["doc_id"].cast<std::string>();
        }
        return p;
    }
    auto seq = obj.cast<py::sequence>();
    p.id = seq[0].cast<std::string>();
    p.text = seq[1].cast<std::string>();
    if (py::len(seq) > 2) {
        p.doc_id = seq[2].cast<std::string>();
    }
    return p;
}

std::vector<hg::Passage> to_corpus(const py::sequence& seq) {
    std::vector<hg::Passage> corpus;
    corpus.reserve(py::len(seq));
    for (py::handle item : seq) {
        corpus.push_back(to_passage(item));
    }
    return corpus;
}

std::vector<std::string> to_string_list(py::handle obj) {
    if (py::isinstance<py::str>(obj)) {
        return {obj.cast<std::string>()};
    }
    std::vector<std::string> out;
    for (py::handle item : obj.cast<py::sequence>()) {
        out.push_back(item.cast<std::string>());
    }
    return out;
}

hg::QAExample to_example(py::handle obj, std::size_t index) {
    auto d = obj.cast<py::dict>();
    hg::QAExample ex;
    ex.id = d.contains("id") ? d["id"].cast<std::string>() : "q" + std::to_string(index);
    ex.question = d["question"].cast<std::string>();
    if (d.contains("answers")) {
        ex.gold_answers = to_string_list(d["answers"]);
    } else if (d.contains("answer")) {
        ex.gold_answers = to_string_list(d["answer"]);
    }
    if (d.contains("supporting_ids")) {
        ex.supporting_ids = to_string_list(d["supporting_ids"]);
    } else if (d.contains("supporting_facts")) {
        ex.supporting_ids = to_string_list(d["supporting_facts"]);
    }
    return ex;
}

std::vector<hg::QAExample> to_dataset(const py::sequence& seq) {
    std::vector<hg::QAExample> dataset;
    dataset.reserve(py::len(seq));
    std::size_t index = 0;
    for (py::handle item : seq) {
        dataset.push_back(to_example(item, index++));
    }
    return dataset;
}

hg::IndexConfig make_index_config(int min_in, int min_out, int max_questions, int retry_limit,
                                  int workers) {
    hg::IndexConfig cfg;
    cfg.min_in_questions = min_in;
    cfg.min_out_questions = min_out;
    cfg.max_questions = max_questions;
    cfg.retry_limit = retry_limit;
    cfg.workers = workers;
    return cfg;
}

// ============================================================
// Output conversion
// ============================================================

py::dict passage_dict(const hg::Passage& p) {
    py::dict d;
    d["id"] = p.id;
    d["text"] = p.text;
    d["doc_id"] = p.doc_id;
    return d;
}

py::dict report_dict(const hg::IndexReport& r) {
    py::list failures;
    for (const auto& f : r.failures) {
        py::dict d;
        d["passage_id"] = f.passage_id;
        d["message"] = f.message;
        failures.append(d);
    }
    py::dict d;
    d["vertex_count"] = r.vertex_count;
    d["edge_count"] = r.edge_count;
    d["avg_out_degree"] = r.avg_out_degree;
    d["llm_calls"] = r.llm_calls;
    d["failures"] = failures;
    d["warnings"] = r.warnings;
    return d;
}

py::dict meta_dict(const hg::BuildMeta& m) {
    py::dict d;
    d["embedder"] = m.embedder;
    d["extractor"] = m.extractor;
    d["chat"] = m.chat;
    d["created_at"] = m.created_at;
    d["notes"] = m.notes;
    return d;
}

// Providers default to the deterministic offline pair when not supplied.
// The hash embedder picks the graph's dimension so features line up.
std::shared_ptr<hg::Embedder> embedder_or_default(std::shared_ptr<hg::Embedder> embedder,
                                                  std::size_t dim) {
    if (embedder) {
        return embedder;
    }
    return std::make_shared<hg::HashEmbedder>(dim == 0 ? 64 : dim);
}

std::shared_ptr<hg::KeywordExtractor>
extractor_or_default(std::shared_ptr<hg::KeywordExtractor> extractor) {
    if (extractor) {
        return extractor;
    }
    return std::make_shared<hg::RuleKeywordExtractor>();
}

hg::TraversalParams make_params(int top_k, int n_hop, bool llm, bool force_hop) {
    hg::TraversalParams params;
    params.top_k = top_k;
    params.n_hop = n_hop;
    params.reasoner_mode = llm ? hg::ReasonerMode::Llm : hg::ReasonerMode::SimilarityMatch;
    params.force_hop = force_hop;
    params.validate();
    return params;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Logic-aware passage retrieval over a question-linked passage graph";

    py::register_exception<hg::Error>(m, "EngineError");

    // ========================================================
    // Similarity formulas and answer metrics
    // ========================================================

    m.def(
        "jaccard",
        [](std::vector<std::string> a, std::vector<std::string> b) {
            return hg::jaccard(hg::Keywords::of(std::move(a)), hg::Keywords::of(std::move(b)));
        },
        py::arg("a"), py::arg("b"),
        "Lexical overlap of two keyword lists (case-folded, deduplicated).");
    m.def(
        "cosine",
        [](std::vector<float> a, std::vector<float> b) {
            return hg::cosine(hg::Embedding{std::move(a)}, hg::Embedding{std::move(b)});
        },
        py::arg("a"), py::arg("b"), "Cosine similarity clamped into [0, 1].");
    m.def(
        "hybrid_sim",
        [](std::vector<std::string> ka, std::vector<float> va, std::vector<std::string> kb,
           std::vector<float> vb) {
            return hg::hybrid_sim(hg::Keywords::of(std::move(ka)), hg::Embedding{std::move(va)},
                                  hg::Keywords::of(std::move(kb)), hg::Embedding{std::move(vb)});
        },
        py::arg("keywords_a"), py::arg("embedding_a"), py::arg("keywords_b"),
        py::arg("embedding_b"), "Arithmetic mean of the jaccard and cosine terms.");

    m.def("normalize_answer", &hg::normalize_answer, py::arg("text"),
          "Lowercase, strip punctuation and articles, collapse whitespace.");
    m.def("exact_match", &hg::exact_match, py::arg("prediction"), py::arg("golds"),
          "1 when the normalized prediction equals any normalized gold answer.");
    m.def("answer_f1", &hg::answer_f1, py::arg("prediction"), py::arg("golds"),
          "Best token-multiset F1 between the prediction and any gold answer.");
    m.def(
        "retrieval_prf",
        [](std::vector<std::string> retrieved, std::vector<std::string> relevant) {
            hg::Prf prf = hg::retrieval_prf(retrieved, relevant);
            return py::make_tuple(prf.precision, prf.recall, prf.f1);
        },
        py::arg("retrieved"), py::arg("relevant"),
        "Set-based (precision, recall, F1) of retrieved ids against the relevant set.");
    m.def("edge_budget", &hg::edge_cap_for, py::arg("n_vertices"),
          "Edge budget n * ceil(log2 n) for an n-vertex graph.");

    // ========================================================
    // Providers
    // ========================================================

    py::class_<hg::Embedder, std::shared_ptr<hg::Embedder>>(m, "Embedder",
                                                            "Turns text into a dense vector.")
        .def("embed",
             [](hg::Embedder& e, const std::string& text) { return e.embed(text).values; },
             py::arg("text"))
        .def_property_readonly("dim", &hg::Embedder::dim)
        .def_property_readonly("name", &hg::Embedder::name);

    py::class_<hg::HashEmbedder, hg::Embedder, std::shared_ptr<hg::HashEmbedder>>(
        m, "HashEmbedder", "Deterministic token-hash embedder; no network, no weights.")
        .def(py::init<std::size_t>(), py::arg("dim") = 64);

    py::class_<hg::KeywordExtractor, std::shared_ptr<hg::KeywordExtractor>>(
        m, "KeywordExtractor", "Pulls the salient terms out of text.")
        .def("extract",
             [](const hg::KeywordExtractor& k, const std::string& text) {
                 return k.extract(text).terms();
             },
             py::arg("text"))
        .def_property_readonly("name", &hg::KeywordExtractor::name);

    py::class_<hg::RuleKeywordExtractor, hg::KeywordExtractor,
               std::shared_ptr<hg::RuleKeywordExtractor>>(
        m, "RuleKeywordExtractor",
        "Keeps capitalized and digit-bearing tokens, case-folded, minus stopwords.")
        .def(py::init<>());

    py::class_<hg::ChatClient, std::shared_ptr<hg::ChatClient>>(
        m, "ChatClient", "Answers one prompt at a time and logs every exchange.")
        .def("chat", &hg::ChatClient::chat, py::arg("prompt"))
        .def("call_count", &hg::ChatClient::call_count)
        .def_property_readonly("name", &hg::ChatClient::name);

    py::class_<hg::ScriptedChat, hg::ChatClient, std::shared_ptr<hg::ScriptedChat>>(
        m, "ScriptedChat",
        "Replays canned responses keyed by the exact prompt; the last scripted reply repeats.")
        .def(py::init<>())
        .def("add_response", &hg::ScriptedChat::add_response, py::arg("prompt"),
             py::arg("response"))
        .def("set_default", &hg::ScriptedChat::set_default, py::arg("response"))
        .def_static("from_file", &hg::ScriptedChat::from_file, py::arg("path"));

    py::class_<hg::EchoChat, hg::ChatClient, std::shared_ptr<hg::EchoChat>>(
        m, "EchoChat", "Returns the prompt itself; handy for wiring tests.")
        .def(py::init<>());

    py::class_<hg::CallbackChat, hg::ChatClient, std::shared_ptr<hg::CallbackChat>>(
        m, "CallbackChat", "Delegates each prompt to a Python callable.")
        .def(py::init([](py::function fn, std::string name) {
                 auto wrapped = [fn = std::move(fn)](const std::string& prompt) -> std::string {
                     py::gil_scoped_acquire gil;
                     return py::cast<std::string>(fn(prompt));
                 };
                 return std::make_shared<hg::CallbackChat>(std::move(wrapped), std::move(name));
             }),
             py::arg("fn"), py::arg("name") = "callback");

    py::class_<hg::OpenAiChatClient, hg::ChatClient, std::shared_ptr<hg::OpenAiChatClient>>(
        m, "OpenAiChatClient", "Chat-completions client for an OpenAI-compatible endpoint.")
        .def(py::init([](std::string endpoint, std::string model, std::string api_key,
                         int timeout_ms, int max_retries, double temperature, int max_tokens) {
                 hg::ProviderConfig cfg;
                 cfg.endpoint = std::move(endpoint);
                 cfg.model_name = std::move(model);
                 cfg.api_key = std::move(api_key);
                 cfg.timeout_ms = timeout_ms;
                 cfg.max_retries = max_retries;
                 cfg.temperature = temperature;
                 cfg.max_tokens = max_tokens;
                 return std::make_shared<hg::OpenAiChatClient>(cfg);
             }),
             py::arg("endpoint"), py::arg("model"), py::arg("api_key") = "",
             py::arg("timeout_ms") = 60000, py::arg("max_retries") = 2,
             py::arg("temperature") = 0.0, py::arg("max_tokens") = 512);

    py::class_<hg::OpenAiEmbedder, hg::Embedder, std::shared_ptr<hg::OpenAiEmbedder>>(
        m, "OpenAiEmbedder", "Embeddings client for an OpenAI-compatible endpoint.")
        .def(py::init([](std::string endpoint, std::string model, std::size_t dim,
                         std::string api_key, int timeout_ms, int max_retries) {
                 hg::ProviderConfig cfg;
                 cfg.endpoint = std::move(endpoint);
                 cfg.model_name = std::move(model);
                 cfg.api_key = std::move(api_key);
                 cfg.timeout_ms = timeout_ms;
                 cfg.max_retries = max_retries;
                 return std::make_shared<hg::OpenAiEmbedder>(cfg, dim);
             }),
             py::arg("endpoint"), py::arg("model"), py::arg("dim"), py::arg("api_key") = "",
             py::arg("timeout_ms") = 30000, py::arg("max_retries") = 2);

    py::class_<hg::CachingEmbedder, hg::Embedder, std::shared_ptr<hg::CachingEmbedder>>(
        m, "CachingEmbedder", "Memoizes an inner embedder keyed by (embedder name, text).")
        .def(py::init<std::shared_ptr<hg::Embedder>>(), py::arg("inner"))
        .def("cache_size", &hg::CachingEmbedder::cache_size);

    // ========================================================
    // Graph
    // ========================================================

    py::class_<hg::PassageGraph>(m, "Graph",
                                 "Directed passage graph with question-derived edges.")
        .def_property_readonly("vertex_count", &hg::PassageGraph::vertex_count)
        .def_property_readonly("edge_count", &hg::PassageGraph::edge_count)
        .def_property_readonly("dim", &hg::PassageGraph::dim)
        .def_property_readonly("edge_cap", &hg::PassageGraph::edge_cap)
        .def("fingerprint", &hg::PassageGraph::fingerprint,
             "Stable content hash over vertices, edges, dimension, and cap.")
        .def("has_passage", &hg::PassageGraph::has_vertex, py::arg("id"))
        .def("passage",
             [](const hg::PassageGraph& g, const std::string& id) {
                 return passage_dict(g.vertex(id).passage);
             },
             py::arg("id"))
        .def("passage_ids",
             [](const hg::PassageGraph& g) {
                 std::vector<std::string> ids;
                 ids.reserve(g.vertex_count());
                 for (const auto& [id, vertex] : g.vertices()) {
                     ids.push_back(id);
                 }
                 return ids;
             })
        .def("edges",
             [](const hg::PassageGraph& g) {
                 py::list out;
                 for (const hg::Edge& e : g.edges()) {
                     py::dict d;
                     d["source"] = e.source_id;
                     d["target"] = e.target_id;
                     d["question"] = e.question;
                     d["keywords"] = e.keywords.terms();
                     d["score"] = e.sim_score;
                     out.append(d);
                 }
                 return out;
             },
             "Capped edges in rank order as dicts.")
        .def("stats",
             [](const hg::PassageGraph& g) {
                 hg::GraphStats s = hg::stats(g);
                 py::dict d;
                 d["vertex_count"] = s.vertex_count;
                 d["edge_count"] = s.edge_count;
                 d["avg_out_degree"] = s.avg_out_degree;
                 d["avg_passage_chars"] = s.avg_passage_chars;
                 return d;
             })
        .def("__repr__", [](const hg::PassageGraph& g) {
            return "<Graph " + std::to_string(g.vertex_count()) + " passages, " +
                   std::to_string(g.edge_count()) + " edges, dim " + std::to_string(g.dim()) +
                   ">";
        });

    // ========================================================
    // Indexing
    // ========================================================

    m.def(
        "build",
        [](const py::sequence& corpus_obj, std::shared_ptr<hg::ChatClient> chat,
           std::shared_ptr<hg::Embedder> embedder,
           std::shared_ptr<hg::KeywordExtractor> extractor, int min_in, int min_out,
           int max_questions, int retry_limit, int workers) {
            if (!chat) {
                throw hg::ConfigError("build needs a chat provider to simulate questions");
            }
            std::vector<hg::Passage> corpus = to_corpus(corpus_obj);
            embedder = embedder_or_default(std::move(embedder), 0);
            extractor = extractor_or_default(std::move(extractor));
            hg::IndexConfig cfg =
                make_index_config(min_in, min_out, max_questions, retry_limit, workers);
            std::pair<hg::PassageGraph, hg::IndexReport> built;
            {
                py::gil_scoped_release release;
                built = hg::build_graph(corpus, cfg, *embedder, *extractor, *chat);
            }
            return py::make_tuple(py::cast(std::move(built.first)), report_dict(built.second));
        },
        py::arg("corpus"), py::arg("chat"), py::arg("embedder") = nullptr,
        py::arg("extractor") = nullptr, py::arg("min_in") = 2, py::arg("min_out") = 4,
        py::arg("max_questions") = 10, py::arg("retry_limit") = 2, py::arg("workers") = 0,
        "Indexes passages (dicts with id/text or (id, text) pairs) into a graph.\n"
        "Returns (graph, report).");

    m.def(
        "extend",
        [](const hg::PassageGraph& graph, py::handle passage_obj,
           std::shared_ptr<hg::ChatClient> chat, std::shared_ptr<hg::Embedder> embedder,
           std::shared_ptr<hg::KeywordExtractor> extractor, int min_in, int min_out,
           int max_questions, int retry_limit) {
            if (!chat) {
                throw hg::ConfigError("extend needs a chat provider to simulate questions");
            }
            hg::Passage passage = to_passage(passage_obj);
            embedder = embedder_or_default(std::move(embedder), graph.dim());
            extractor = extractor_or_default(std::move(extractor));
            hg::IndexConfig cfg = make_index_config(min_in, min_out, max_questions, retry_limit,
                                                    /*workers=*/1);
            py::gil_scoped_release release;
            return hg::add_passage(graph, passage, cfg, *embedder, *extractor, *chat);
        },
        py::arg("graph"), py::arg("passage"), py::arg("chat"), py::arg("embedder") = nullptr,
        py::arg("extractor") = nullptr, py::arg("min_in") = 2, py::arg("min_out") = 4,
        py::arg("max_questions") = 10, py::arg("retry_limit") = 2,
        "Returns a new graph with one more passage; equal to a batch rebuild.");

    m.def(
        "load_corpus",
        [](const std::string& path) {
            py::list out;
            for (const hg::Passage& p : hg::load_corpus_jsonl(path)) {
                out.append(passage_dict(p));
            }
            return out;
        },
        py::arg("path"), "Reads a JSONL corpus file: one {id, text, doc_id?} object per line.");

    // ========================================================
    // Storage
    // ========================================================

    m.def(
        "save",
        [](const hg::PassageGraph& graph, const std::string& path, std::string embedder,
           std::string extractor, std::string chat, std::string notes) {
            hg::BuildMeta meta;
            meta.embedder = std::move(embedder);
            meta.extractor = std::move(extractor);
            meta.chat = std::move(chat);
            meta.notes = std::move(notes);
            py::gil_scoped_release release;
            hg::save(graph, meta, path);
        },
        py::arg("graph"), py::arg("path"), py::arg("embedder") = "", py::arg("extractor") = "",
        py::arg("chat") = "", py::arg("notes") = "",
        "Writes a checksummed single-file archive (atomic replace).");

    m.def(
        "load",
        [](const std::string& path) {
            hg::LoadedGraph loaded;
            {
                py::gil_scoped_release release;
                loaded = hg::load(path);
            }
            return py::make_tuple(py::cast(std::move(loaded.graph)), meta_dict(loaded.meta));
        },
        py::arg("path"), "Reads an archive back; returns (graph, meta).");

    // ========================================================
    // Retrieval and evaluation
    // ========================================================

    m.def(
        "retrieve",
        [](const std::string& query, const hg::PassageGraph& graph, int top_k, int n_hop,
           std::shared_ptr<hg::ChatClient> chat, std::shared_ptr<hg::Embedder> embedder,
           std::shared_ptr<hg::KeywordExtractor> extractor, bool force_hop) {
            embedder = embedder_or_default(std::move(embedder), graph.dim());
            extractor = extractor_or_default(std::move(extractor));
            hg::TraversalParams params =
                make_params(top_k, n_hop, /*llm=*/chat != nullptr, force_hop);
            hg::RetrievalResult result;
            {
                py::gil_scoped_release release;
                hg::HybridIndex index = hg::HybridIndex::over_edges(graph);
                result = hg::retrieve(query, graph, &index, params, *embedder, *extractor,
                                      hg::Reasoner{chat.get()});
            }
            py::list context;
            for (std::size_t i = 0; i < result.context.size(); ++i) {
                py::dict entry = passage_dict(result.context[i]);
                const hg::PruneRecord& kept = result.trace.kept[i];
                entry["helpfulness"] = kept.helpfulness;
                entry["query_sim"] = kept.query_sim;
                entry["visits"] = kept.visits;
                context.append(entry);
            }
            py::dict out;
            out["context"] = context;
            out["llm_calls"] = result.trace.llm_calls;
            out["warnings"] = result.trace.warnings;
            out["trace_json"] = result.trace.to_json();
            return out;
        },
        py::arg("query"), py::arg("graph"), py::arg("top_k") = 4, py::arg("n_hop") = 4,
        py::arg("chat") = nullptr, py::arg("embedder") = nullptr, py::arg("extractor") = nullptr,
        py::arg("force_hop") = false,
        "Retrieves passages for a query. With a chat client the walk is LLM-guided;\n"
        "without one it follows the similarity reasoner.");

    m.def(
        "evaluate_json",
        [](const py::sequence& dataset_obj, const hg::PassageGraph& graph, int top_k, int n_hop,
           std::shared_ptr<hg::ChatClient> chat, std::shared_ptr<hg::ChatClient> generator,
           std::shared_ptr<hg::Embedder> embedder,
           std::shared_ptr<hg::KeywordExtractor> extractor) {
            std::vector<hg::QAExample> dataset = to_dataset(dataset_obj);
            embedder = embedder_or_default(std::move(embedder), graph.dim());
            extractor = extractor_or_default(std::move(extractor));
            hg::TraversalParams params =
                make_params(top_k, n_hop, /*llm=*/chat != nullptr, /*force_hop=*/false);
            hg::EvalReport report;
            {
                py::gil_scoped_release release;
                hg::HybridIndex index = hg::HybridIndex::over_edges(graph);
                hg::PromptTemplate answer_prompt = hg::PromptSet::defaults().answer;
                report = hg::run_eval(dataset, graph, &index, params, *embedder, *extractor,
                                      hg::Reasoner{chat.get()}, generator.get(), &answer_prompt);
            }
            return report.to_json();
        },
        py::arg("dataset"), py::arg("graph"), py::arg("top_k") = 4, py::arg("n_hop") = 4,
        py::arg("chat") = nullptr, py::arg("generator") = nullptr, py::arg("embedder") = nullptr,
        py::arg("extractor") = nullptr,
        "Scores retrieval (and, with a generator, answers) over a dataset of\n"
        "{question, answers, supporting_ids} dicts. Returns the report as JSON text.");
}
