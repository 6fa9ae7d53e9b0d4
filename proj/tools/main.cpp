// Command line front end: build a passage graph from a corpus, query it,
// evaluate it against a QA dataset, or print archive stats.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hopgraph/errors.hpp"
#include "hopgraph/evalkit.hpp"
#include "hopgraph/http_provider.hpp"
#include "hopgraph/hybrid_index.hpp"
#include "hopgraph/indexer.hpp"
#include "hopgraph/prompts.hpp"
#include "hopgraph/providers.hpp"
#include "hopgraph/storage.hpp"
#include "hopgraph/traversal.hpp"

namespace hg = hopgraph;

namespace {

// Exit codes, one class of failure each.
constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitProvider = 4;
constexpr int kExitArchive = 5;

// ============================================================
// Configuration
// ============================================================

struct EmbeddingConfig {
    std::string provider = "hash"; // hash | openai
    std::size_t dim = 64;
    std::string model;
    std::string endpoint;
    std::string api_key;
    int timeout_ms = 30000;
    int max_retries = 2;
    bool cache = true;
};

struct ChatConfig {
    std::string provider = "none"; // none | scripted | echo | openai
    std::string script;            // scripted: path to the response script
    std::optional<std::string> default_response;
    std::string model;
    std::string endpoint;
    std::string api_key;
    int timeout_ms = 60000;
    int max_retries = 2;
    double temperature = 0.0;
    int max_tokens = 512;
};

struct AppConfig {
    EmbeddingConfig embedding;
    std::string keyword_provider = "rules";
    ChatConfig chat;
    hg::IndexConfig index;
    std::string prompt_dir;
    hg::TraversalParams traversal;
    std::string trace_jsonl;
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

AppConfig load_app_config(const std::string& path) {
    AppConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw hg::ConfigError("cannot open config file: " + path);
        }
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw hg::ConfigError("config file " + path + " is not valid JSON: " + e.what());
        }
        try {
            if (doc.contains("embedding")) {
                const auto& j = doc["embedding"];
                cfg.embedding.provider = j.value("provider", cfg.embedding.provider);
                cfg.embedding.dim = j.value("dim", cfg.embedding.dim);
                cfg.embedding.model = j.value("model", cfg.embedding.model);
                cfg.embedding.endpoint = j.value("endpoint", cfg.embedding.endpoint);
                cfg.embedding.api_key = j.value("api_key", cfg.embedding.api_key);
                cfg.embedding.timeout_ms = j.value("timeout_ms", cfg.embedding.timeout_ms);
                cfg.embedding.max_retries = j.value("max_retries", cfg.embedding.max_retries);
                cfg.embedding.cache = j.value("cache", cfg.embedding.cache);
            }
            if (doc.contains("keywords")) {
                cfg.keyword_provider = doc["keywords"].value("provider", cfg.keyword_provider);
            }
            if (doc.contains("chat")) {
                const auto& j = doc["chat"];
                cfg.chat.provider = j.value("provider", cfg.chat.provider);
                cfg.chat.script = j.value("script", cfg.chat.script);
                if (j.contains("default_response")) {
                    cfg.chat.default_response = j["default_response"].get<std::string>();
                }
                cfg.chat.model = j.value("model", cfg.chat.model);
                cfg.chat.endpoint = j.value("endpoint", cfg.chat.endpoint);
                cfg.chat.api_key = j.value("api_key", cfg.chat.api_key);
                cfg.chat.timeout_ms = j.value("timeout_ms", cfg.chat.timeout_ms);
                cfg.chat.max_retries = j.value("max_retries", cfg.chat.max_retries);
                cfg.chat.temperature = j.value("temperature", cfg.chat.temperature);
                cfg.chat.max_tokens = j.value("max_tokens", cfg.chat.max_tokens);
            }
            if (doc.contains("index")) {
                const auto& j = doc["index"];
                cfg.index.min_in_questions = j.value("min_in", cfg.index.min_in_questions);
                cfg.index.min_out_questions = j.value("min_out", cfg.index.min_out_questions);
                cfg.index.max_questions = j.value("max_questions", cfg.index.max_questions);
                cfg.index.retry_limit = j.value("retry_limit", cfg.index.retry_limit);
                cfg.index.workers = j.value("workers", cfg.index.workers);
                cfg.prompt_dir = j.value("prompt_dir", cfg.prompt_dir);
            }
            if (doc.contains("traversal")) {
                const auto& j = doc["traversal"];
                cfg.traversal.top_k = j.value("top_k", cfg.traversal.top_k);
                cfg.traversal.n_hop = j.value("n_hop", cfg.traversal.n_hop);
                std::string mode = j.value("reasoner", std::string("llm"));
                if (mode == "llm") {
                    cfg.traversal.reasoner_mode = hg::ReasonerMode::Llm;
                } else if (mode == "similarity") {
                    cfg.traversal.reasoner_mode = hg::ReasonerMode::SimilarityMatch;
                } else {
                    throw hg::ConfigError("traversal.reasoner must be 'llm' or 'similarity'");
                }
                cfg.traversal.force_hop = j.value("force_hop", cfg.traversal.force_hop);
            }
            cfg.trace_jsonl = doc.value("trace_jsonl", cfg.trace_jsonl);
        } catch (const nlohmann::json::exception& e) {
            throw hg::ConfigError("config file " + path + " has a bad field: " + e.what());
        }
    }

    // Environment-supplied secrets and endpoints beat the config file.
    cfg.chat.api_key = env_or("HOPGRAPH_CHAT_API_KEY", cfg.chat.api_key);
    cfg.chat.endpoint = env_or("HOPGRAPH_CHAT_ENDPOINT", cfg.chat.endpoint);
    cfg.embedding.api_key = env_or("HOPGRAPH_EMBED_API_KEY", cfg.embedding.api_key);
    cfg.embedding.endpoint = env_or("HOPGRAPH_EMBED_ENDPOINT", cfg.embedding.endpoint);

    if (!cfg.prompt_dir.empty()) {
        cfg.index.prompts = hg::PromptSet::from_dir(cfg.prompt_dir);
    }
    return cfg;
}

// ============================================================
// Provider wiring
// ============================================================

struct Providers {
    std::shared_ptr<hg::Embedder> embedder;
    std::shared_ptr<hg::KeywordExtractor> extractor;
    std::shared_ptr<hg::ChatClient> chat; // may be null
    std::shared_ptr<hg::JsonlTraceWriter> trace;
};

Providers make_providers(const AppConfig& cfg, bool need_chat) {
    Providers out;

    if (cfg.embedding.provider == "hash") {
        out.embedder = std::make_shared<hg::HashEmbedder>(cfg.embedding.dim);
    } else if (cfg.embedding.provider == "openai") {
        hg::ProviderConfig pc;
        pc.endpoint = cfg.embedding.endpoint;
        pc.model_name = cfg.embedding.model;
        pc.api_key = cfg.embedding.api_key;
        pc.timeout_ms = cfg.embedding.timeout_ms;
        pc.max_retries = cfg.embedding.max_retries;
        auto remote = std::make_shared<hg::OpenAiEmbedder>(pc, cfg.embedding.dim);
        out.embedder = cfg.embedding.cache
                           ? std::static_pointer_cast<hg::Embedder>(
                                 std::make_shared<hg::CachingEmbedder>(remote))
                           : remote;
    } else {
        throw hg::ConfigError("unknown embedding provider: " + cfg.embedding.provider);
    }

    if (cfg.keyword_provider == "rules") {
        out.extractor = std::make_shared<hg::RuleKeywordExtractor>();
    } else {
        throw hg::ConfigError("unknown keyword provider: " + cfg.keyword_provider);
    }

    if (cfg.chat.provider == "none") {
        if (need_chat) {
            throw hg::ConfigError("this command needs a chat provider; set chat.provider "
                                  "to scripted, echo, or openai");
        }
    } else if (cfg.chat.provider == "scripted") {
        if (cfg.chat.script.empty()) {
            throw hg::ConfigError("chat.provider 'scripted' needs chat.script");
        }
        auto scripted = hg::ScriptedChat::from_file(cfg.chat.script);
        if (cfg.chat.default_response) {
            scripted->set_default(*cfg.chat.default_response);
        }
        out.chat = scripted;
    } else if (cfg.chat.provider == "echo") {
        out.chat = std::make_shared<hg::EchoChat>();
    } else if (cfg.chat.provider == "openai") {
        hg::ProviderConfig pc;
        pc.endpoint = cfg.chat.endpoint;
        pc.model_name = cfg.chat.model;
        pc.api_key = cfg.chat.api_key;
        pc.timeout_ms = cfg.chat.timeout_ms;
        pc.max_retries = cfg.chat.max_retries;
        pc.temperature = cfg.chat.temperature;
        pc.max_tokens = cfg.chat.max_tokens;
        out.chat = std::make_shared<hg::OpenAiChatClient>(pc);
    } else {
        throw hg::ConfigError("unknown chat provider: " + cfg.chat.provider);
    }

    if (!cfg.trace_jsonl.empty() && out.chat) {
        out.trace = std::make_shared<hg::JsonlTraceWriter>(cfg.trace_jsonl);
        out.chat->mirror_to(out.trace);
    }
    return out;
}

// ============================================================
// Shared helpers
// ============================================================

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw hg::ConfigError(std::string(what) + " expects integers, got: " + part);
        }
    }
    if (out.empty()) {
        throw hg::ConfigError(std::string(what) + " must not be empty");
    }
    return out;
}

hg::LoadedGraph load_graph_or_die(const std::string& path) {
    return hg::load(path);
}

std::string preview(const std::string& text, std::size_t max_chars) {
    if (text.size() <= max_chars) {
        return text;
    }
    return text.substr(0, max_chars) + "...";
}

// ============================================================
// Subcommands
// ============================================================

struct BuildArgs {
    std::string corpus;
    std::string out = "graph.bin";
    bool dry_run = false;
    bool json = false;
};

int cmd_build(const AppConfig& cfg, const BuildArgs& args) {
    std::vector<hg::Passage> corpus = hg::load_corpus_jsonl(args.corpus);

    if (args.dry_run) {
        nlohmann::json plan = {
            {"passages", corpus.size()},
            {"embedding_provider", cfg.embedding.provider},
            {"chat_provider", cfg.chat.provider},
            {"min_llm_calls", corpus.size() * 2},
            {"out", args.out},
        };
        if (args.json) {
            std::cout << plan.dump(2) << "\n";
        } else {
            std::cout << "dry run: would index " << corpus.size() << " passages with chat '"
                      << cfg.chat.provider << "' and embeddings '" << cfg.embedding.provider
                      << "' (at least " << corpus.size() * 2 << " chat calls), writing "
                      << args.out << "\n";
        }
        return kExitOk;
    }

    Providers prov = make_providers(cfg, /*need_chat=*/true);
    auto [graph, report] =
        hg::build_graph(corpus, cfg.index, *prov.embedder, *prov.extractor, *prov.chat);

    hg::BuildMeta meta;
    meta.embedder = prov.embedder->name();
    meta.extractor = prov.extractor->name();
    meta.chat = prov.chat->name();
    hg::save(graph, meta, args.out);

    if (args.json) {
        nlohmann::json failures = nlohmann::json::array();
        for (const auto& f : report.failures) {
            failures.push_back({{"passage", f.passage_id}, {"message", f.message}});
        }
        nlohmann::json doc = {{"vertices", report.vertex_count},
                              {"edges", report.edge_count},
                              {"avg_out_degree", report.avg_out_degree},
                              {"llm_calls", report.llm_calls},
                              {"failures", std::move(failures)},
                              {"warnings", report.warnings},
                              {"out", args.out}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "indexed " << report.vertex_count << " passages into " << report.edge_count
                  << " edges (avg out-degree " << report.avg_out_degree << ", "
                  << report.llm_calls << " chat calls)\n";
        for (const auto& f : report.failures) {
            std::cout << "  problem with " << f.passage_id << ": " << f.message << "\n";
        }
        for (const auto& w : report.warnings) {
            std::cout << "  warning: " << w << "\n";
        }
        std::cout << "wrote " << args.out << "\n";
    }
    return kExitOk;
}

struct QueryArgs {
    std::string graph;
    std::string query;
    std::optional<int> top_k;
    std::optional<int> n_hop;
    bool no_llm = false;
    bool force_hop = false;
    std::string trace_path;
    bool dry_run = false;
    bool json = false;
};

int cmd_query(const AppConfig& cfg, const QueryArgs& args) {
    hg::TraversalParams params = cfg.traversal;
    if (args.top_k) {
        params.top_k = *args.top_k;
    }
    if (args.n_hop) {
        params.n_hop = *args.n_hop;
    }
    if (args.no_llm) {
        params.reasoner_mode = hg::ReasonerMode::SimilarityMatch;
    }
    if (args.force_hop) {
        params.force_hop = true;
    }
    params.validate();

    hg::LoadedGraph loaded = load_graph_or_die(args.graph);

    if (args.dry_run) {
        std::cout << "dry run: graph " << args.graph << " has " << loaded.graph.vertex_count()
                  << " vertices / " << loaded.graph.edge_count() << " edges; would run top_k="
                  << params.top_k << " n_hop=" << params.n_hop << " reasoner="
                  << (params.reasoner_mode == hg::ReasonerMode::Llm ? "llm" : "similarity")
                  << "\n";
        return kExitOk;
    }

    bool need_chat = params.reasoner_mode == hg::ReasonerMode::Llm;
    Providers prov = make_providers(cfg, need_chat);

    hg::PromptTemplate reason_prompt = cfg.index.prompts.reason;
    hg::Reasoner reasoner{prov.chat.get(), &reason_prompt};

    hg::HybridIndex index = hg::HybridIndex::over_edges(loaded.graph);
    hg::RetrievalResult result = hg::retrieve(args.query, loaded.graph, &index, params,
                                              *prov.embedder, *prov.extractor, reasoner);

    if (!args.trace_path.empty()) {
        std::ofstream out(args.trace_path);
        if (!out) {
            throw hg::Error("cannot write trace file: " + args.trace_path);
        }
        out << result.trace.to_json() << "\n";
    }

    if (args.json) {
        nlohmann::json passages = nlohmann::json::array();
        for (std::size_t i = 0; i < result.context.size(); ++i) {
            const auto& k = result.trace.kept[i];
            passages.push_back({{"rank", i + 1},
                                {"id", result.context[i].id},
                                {"text", result.context[i].text},
                                {"helpfulness", k.helpfulness},
                                {"query_sim", k.query_sim},
                                {"visits", k.visits}});
        }
        nlohmann::json doc = {{"query", args.query},
                              {"context", std::move(passages)},
                              {"llm_calls", result.trace.llm_calls},
                              {"warnings", result.trace.warnings}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "query: " << args.query << "\n";
        for (std::size_t i = 0; i < result.context.size(); ++i) {
            const auto& k = result.trace.kept[i];
            std::cout << "  " << (i + 1) << ". [" << result.context[i].id << "] h=" << k.helpfulness
                      << " visits=" << k.visits << "  " << preview(result.context[i].text, 100)
                      << "\n";
        }
        if (result.context.empty()) {
            std::cout << "  (no passages retrieved)\n";
        }
        std::cout << "llm calls: " << result.trace.llm_calls << "\n";
        for (const auto& w : result.trace.warnings) {
            std::cout << "warning: " << w << "\n";
        }
    }
    return kExitOk;
}

struct EvalArgs {
    std::string graph;
    std::string dataset;
    std::string top_k_list;
    std::string n_hop_list;
    bool no_llm = false;
    bool generate = false;
    std::string out_dir;
    bool dry_run = false;
    bool json = false;
};

int cmd_eval(const AppConfig& cfg, const EvalArgs& args) {
    hg::LoadedGraph loaded = load_graph_or_die(args.graph);
    std::vector<hg::QAExample> dataset = hg::load_dataset(args.dataset);

    std::vector<int> top_ks = args.top_k_list.empty()
                                  ? std::vector<int>{cfg.traversal.top_k}
                                  : parse_int_list(args.top_k_list, "--top-k");
    std::vector<int> n_hops = args.n_hop_list.empty()
                                  ? std::vector<int>{cfg.traversal.n_hop}
                                  : parse_int_list(args.n_hop_list, "--n-hop");

    if (args.dry_run) {
        std::cout << "dry run: would evaluate " << dataset.size() << " examples over "
                  << top_ks.size() * n_hops.size() << " parameter combination(s)\n";
        return kExitOk;
    }

    bool llm_mode = cfg.traversal.reasoner_mode == hg::ReasonerMode::Llm && !args.no_llm;
    Providers prov = make_providers(cfg, llm_mode || args.generate);

    hg::PromptTemplate reason_prompt = cfg.index.prompts.reason;
    hg::PromptTemplate answer_prompt = cfg.index.prompts.answer;
    hg::Reasoner reasoner{llm_mode ? prov.chat.get() : nullptr, &reason_prompt};
    hg::ChatClient* generator = args.generate ? prov.chat.get() : nullptr;

    hg::HybridIndex index = hg::HybridIndex::over_edges(loaded.graph);

    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
    }

    struct SweepRow {
        int top_k;
        int n_hop;
        hg::EvalReport report;
    };
    std::vector<SweepRow> rows;
    for (int k : top_ks) {
        for (int h : n_hops) {
            hg::TraversalParams params = cfg.traversal;
            params.top_k = k;
            params.n_hop = h;
            if (args.no_llm) {
                params.reasoner_mode = hg::ReasonerMode::SimilarityMatch;
            }
            params.validate();
            hg::EvalReport report =
                hg::run_eval(dataset, loaded.graph, &index, params, *prov.embedder,
                             *prov.extractor, reasoner, generator, &answer_prompt);
            if (!args.out_dir.empty()) {
                std::string stem = "eval_k" + std::to_string(k) + "_h" + std::to_string(h);
                std::ofstream js(std::filesystem::path(args.out_dir) / (stem + ".json"));
                js << report.to_json() << "\n";
                std::ofstream tx(std::filesystem::path(args.out_dir) / (stem + ".txt"));
                tx << report.to_table();
            }
            rows.push_back({k, h, std::move(report)});
        }
    }

    if (args.json) {
        nlohmann::json docs = nlohmann::json::array();
        for (const auto& row : rows) {
            docs.push_back(nlohmann::json::parse(row.report.to_json()));
        }
        std::cout << (rows.size() == 1 ? docs[0].dump(2) : docs.dump(2)) << "\n";
    } else if (rows.size() == 1) {
        std::cout << rows[0].report.to_table();
    } else {
        char line[160];
        std::cout << "  top_k  n_hop      EM      F1   Ret-P   Ret-R  Ret-F1  LLM calls\n";
        for (const auto& row : rows) {
            std::snprintf(line, sizeof(line),
                          "  %5d  %5d  %6.3f  %6.3f  %6.3f  %6.3f  %6.3f  %9.1f\n", row.top_k,
                          row.n_hop, row.report.answer_em, row.report.answer_f1,
                          row.report.retrieval_precision, row.report.retrieval_recall,
                          row.report.retrieval_f1, row.report.mean_llm_calls);
            std::cout << line;
        }
    }
    return kExitOk;
}

struct StatsArgs {
    std::string graph;
    bool json = false;
};

int cmd_stats(const StatsArgs& args) {
    hg::LoadedGraph loaded = load_graph_or_die(args.graph);
    hg::GraphStats s = hg::stats(loaded.graph);
    if (args.json) {
        nlohmann::json doc = {{"vertices", s.vertex_count},
                              {"edges", s.edge_count},
                              {"avg_out_degree", s.avg_out_degree},
                              {"avg_passage_chars", s.avg_passage_chars},
                              {"dim", loaded.graph.dim()},
                              {"edge_cap", loaded.graph.edge_cap()},
                              {"fingerprint", loaded.graph.fingerprint()},
                              {"meta",
                               {{"embedder", loaded.meta.embedder},
                                {"extractor", loaded.meta.extractor},
                                {"chat", loaded.meta.chat},
                                {"created_at", loaded.meta.created_at}}}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "vertices:           " << s.vertex_count << "\n"
                  << "edges:              " << s.edge_count << " (cap "
                  << loaded.graph.edge_cap() << ")\n"
                  << "avg out-degree:     " << s.avg_out_degree << "\n"
                  << "avg passage chars:  " << s.avg_passage_chars << "\n"
                  << "embedding dim:      " << loaded.graph.dim() << "\n"
                  << "fingerprint:        " << loaded.graph.fingerprint() << "\n"
                  << "built with:         " << loaded.meta.embedder << " / "
                  << loaded.meta.chat << " at " << loaded.meta.created_at << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Logic-aware passage retrieval over a question-linked graph"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")->envname("HOPGRAPH_CONFIG");

    BuildArgs build_args;
    CLI::App* build = app.add_subcommand("build", "Index a corpus into a graph archive");
    build->add_option("--corpus", build_args.corpus, "Corpus JSONL, one passage per line")
        ->required();
    build->add_option("--out", build_args.out, "Archive path to write");
    build->add_flag("--dry-run", build_args.dry_run, "Validate inputs and exit");
    build->add_flag("--json", build_args.json, "Machine-readable output");

    QueryArgs query_args;
    CLI::App* query = app.add_subcommand("query", "Retrieve passages for one question");
    query->add_option("--graph", query_args.graph, "Graph archive")->required();
    query->add_option("--query", query_args.query, "Question text")->required();
    int query_top_k = 0;
    int query_n_hop = -1;
    query->add_option("--top-k", query_top_k, "Passages to keep");
    query->add_option("--n-hop", query_n_hop, "Traversal rounds");
    query->add_flag("--no-llm", query_args.no_llm, "Similarity reasoner instead of the LLM");
    query->add_flag("--force-hop", query_args.force_hop, "Hop on 'none' answers too");
    query->add_option("--trace", query_args.trace_path, "Write the traversal trace JSON here");
    query->add_flag("--dry-run", query_args.dry_run, "Validate inputs and exit");
    query->add_flag("--json", query_args.json, "Machine-readable output");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score retrieval against a QA dataset");
    eval->add_option("--graph", eval_args.graph, "Graph archive")->required();
    eval->add_option("--dataset", eval_args.dataset, "QA dataset (JSON or JSONL)")->required();
    eval->add_option("--top-k", eval_args.top_k_list, "Value or comma list to sweep");
    eval->add_option("--n-hop", eval_args.n_hop_list, "Value or comma list to sweep");
    eval->add_flag("--no-llm", eval_args.no_llm, "Similarity reasoner instead of the LLM");
    eval->add_flag("--generate", eval_args.generate, "Also generate and score answers");
    eval->add_option("--out", eval_args.out_dir, "Directory for per-combination reports");
    eval->add_flag("--dry-run", eval_args.dry_run, "Validate inputs and exit");
    eval->add_flag("--json", eval_args.json, "Machine-readable output");

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "Describe a graph archive");
    stats->add_option("--graph", stats_args.graph, "Graph archive")->required();
    stats->add_flag("--json", stats_args.json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        AppConfig cfg = load_app_config(config_path);
        if (build->parsed()) {
            return cmd_build(cfg, build_args);
        }
        if (query->parsed()) {
            if (query->count("--top-k") > 0) {
                query_args.top_k = query_top_k;
            }
            if (query->count("--n-hop") > 0) {
                query_args.n_hop = query_n_hop;
            }
            return cmd_query(cfg, query_args);
        }
        if (eval->parsed()) {
            return cmd_eval(cfg, eval_args);
        }
        if (stats->parsed()) {
            return cmd_stats(stats_args);
        }
        std::cerr << "no subcommand given\n";
        return kExitConfig;
    } catch (const hg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hg::CorpusError& e) {
        std::cerr << "corpus error: " << e.what() << "\n";
        return kExitData;
    } catch (const hg::EvalInputError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitData;
    } catch (const hg::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const hg::SimulationError& e) {
        std::cerr << "indexing error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const hg::VersionError& e) {
        std::cerr << "archive error: " << e.what() << "\n";
        return kExitArchive;
    } catch (const hg::ChecksumError& e) {
        std::cerr << "archive error: " << e.what() << "\n";
        return kExitArchive;
    } catch (const hg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitOther;
    }
}
