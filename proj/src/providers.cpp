#include "hopgraph/providers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <sstream>

#include "hopgraph/text.hpp"
#include "json.hpp"

namespace hopgraph {

void ProviderConfig::validate() const {
    if (endpoint.empty()) {
        throw ConfigError("provider endpoint must not be empty");
    }
    if (timeout_ms <= 0) {
        throw ConfigError("provider timeout_ms must be positive");
    }
    if (max_retries < 0) {
        throw ConfigError("provider max_retries must be non-negative");
    }
    if (temperature < 0.0 || temperature > 2.0) {
        throw ConfigError("provider temperature must be within [0, 2]");
    }
    if (max_tokens <= 0) {
        throw ConfigError("provider max_tokens must be positive");
    }
}

std::size_t approx_token_count(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::size_t n = 0;
    while (in >> word) {
        ++n;
    }
    return n;
}

// ============================================================
// JsonlTraceWriter
// ============================================================

JsonlTraceWriter::JsonlTraceWriter(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) {
        throw Error("cannot open trace file: " + path);
    }
}

void JsonlTraceWriter::write_line(const std::string& json_line) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << json_line << '\n';
    out_.flush();
}

// ============================================================
// ChatClient / Embedder bases
// ============================================================

namespace {

// Usage reported by the backend for the exchange in flight on this thread.
struct PendingUsage {
    bool valid = false;
    std::size_t input = 0;
    std::size_t output = 0;
};
thread_local PendingUsage g_pending_usage;

} // namespace

void ChatClient::report_usage(std::size_t input_tokens, std::size_t output_tokens) {
    g_pending_usage = {true, input_tokens, output_tokens};
}

std::string ChatClient::chat(const std::string& prompt) {
    if (prompt.empty()) {
        throw Error("chat: prompt must not be empty");
    }
    g_pending_usage = {};
    auto t0 = std::chrono::steady_clock::now();
    std::string response = complete(prompt);
    auto t1 = std::chrono::steady_clock::now();

    ChatExchange ex;
    ex.prompt = prompt;
    ex.response = response;
    if (g_pending_usage.valid) {
        ex.input_tokens = g_pending_usage.input;
        ex.output_tokens = g_pending_usage.output;
    } else {
        ex.input_tokens = approx_token_count(prompt);
        ex.output_tokens = approx_token_count(response);
    }
    ex.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    std::shared_ptr<JsonlTraceWriter> sink;
    {
        std::lock_guard<std::mutex> lock(mu_);
        log_.push_back(ex);
        sink = sink_;
    }
    if (sink) {
        nlohmann::json line = {{"kind", "chat"},
                               {"client", name()},
                               {"prompt", ex.prompt},
                               {"response", ex.response},
                               {"input_tokens", ex.input_tokens},
                               {"output_tokens", ex.output_tokens},
                               {"latency_ms", ex.latency_ms}};
        sink->write_line(line.dump());
    }
    return response;
}

std::vector<ChatExchange> ChatClient::exchanges() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_;
}

std::size_t ChatClient::call_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_.size();
}

void ChatClient::mirror_to(std::shared_ptr<JsonlTraceWriter> sink) {
    std::lock_guard<std::mutex> lock(mu_);
    sink_ = std::move(sink);
}

Embedding Embedder::embed(const std::string& text) {
    if (text.empty()) {
        throw Error("embed: text must not be empty");
    }
    Embedding v = compute(text);
    if (v.dim() != dim()) {
        throw DimensionError("embedder '" + name() + "' returned dimension " +
                             std::to_string(v.dim()) + ", expected " + std::to_string(dim()));
    }
    if (!v.is_finite()) {
        throw Error("embedder '" + name() + "' returned a non-finite value");
    }
    return v;
}

// ============================================================
// HashEmbedder
// ============================================================

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) {
        throw ConfigError("hash embedder dimension must be positive");
    }
}

std::string HashEmbedder::name() const {
    return "hash-" + std::to_string(dim_);
}

Embedding HashEmbedder::compute(const std::string& text) {
    std::vector<float> values(dim_, 0.0f);
    for (const auto& token : tokenize(text)) {
        std::uint64_t h = fnv1a64(fold_case(token));
        values[static_cast<std::size_t>(h % dim_)] += 1.0f;
    }
    double norm_sq = 0.0;
    for (float x : values) {
        norm_sq += static_cast<double>(x) * static_cast<double>(x);
    }
    if (norm_sq > 0.0) {
        float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
        for (float& x : values) {
            x *= inv;
        }
    }
    return Embedding{std::move(values)};
}

// ============================================================
// RuleKeywordExtractor
// ============================================================

RuleKeywordExtractor::RuleKeywordExtractor() {
    stopwords_ = {
        "a",    "an",   "and",  "are", "as",   "at",   "be",   "by",   "for",
        "from", "has",  "he",   "her", "his",  "in",   "is",   "it",   "its",
        "of",   "on",   "or",   "she", "that", "the",  "they", "this", "to",
        "was",  "were", "what", "when", "where", "which", "who", "why",  "will",
        "with",
    };
    std::sort(stopwords_.begin(), stopwords_.end());
}

Keywords RuleKeywordExtractor::extract(const std::string& text) const {
    std::vector<std::string> picked;
    for (const auto& token : tokenize(text)) {
        bool capitalized = std::isupper(static_cast<unsigned char>(token.front())) != 0;
        bool has_digit = std::any_of(token.begin(), token.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        });
        if (!capitalized && !has_digit) {
            continue;
        }
        std::string folded = fold_case(token);
        if (std::binary_search(stopwords_.begin(), stopwords_.end(), folded)) {
            continue;
        }
        picked.push_back(std::move(folded));
    }
    return Keywords::of(std::move(picked));
}

// ============================================================
// ScriptedChat
// ============================================================

std::shared_ptr<ScriptedChat> ScriptedChat::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open chat script: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("chat script " + path + " is not valid JSON: " + e.what());
    }

    auto chat = std::make_shared<ScriptedChat>();
    if (doc.contains("default")) {
        chat->set_default(doc.at("default").get<std::string>());
    }
    if (!doc.contains("entries")) {
        return chat;
    }
    for (const auto& entry : doc.at("entries")) {
        std::string prompt = entry.at("prompt").get<std::string>();
        if (entry.contains("responses")) {
            for (const auto& r : entry.at("responses")) {
                chat->add_response(prompt, r.get<std::string>());
            }
        } else {
            chat->add_response(prompt, entry.at("response").get<std::string>());
        }
    }
    return chat;
}

void ScriptedChat::add_response(const std::string& prompt, std::string response) {
    std::lock_guard<std::mutex> lock(script_mu_);
    responses_[prompt].push_back(std::move(response));
}

void ScriptedChat::set_default(std::string response) {
    std::lock_guard<std::mutex> lock(script_mu_);
    has_default_ = true;
    default_response_ = std::move(response);
}

std::string ScriptedChat::complete(const std::string& prompt) {
    std::lock_guard<std::mutex> lock(script_mu_);
    auto it = responses_.find(prompt);
    if (it == responses_.end()) {
        if (has_default_) {
            return default_response_;
        }
        throw ProviderError("scripted chat has no response for prompt: " +
                            prompt.substr(0, std::min<std::size_t>(prompt.size(), 120)));
    }
    std::size_t& pos = cursor_[prompt];
    const auto& seq = it->second;
    std::string out = seq[std::min(pos, seq.size() - 1)];
    if (pos + 1 < seq.size()) {
        ++pos;
    } else {
        pos = seq.size() - 1; // last scripted reply repeats
    }
    return out;
}

// ============================================================
// CallbackChat / CachingEmbedder
// ============================================================

CallbackChat::CallbackChat(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {
    if (!fn_) {
        throw ConfigError("callback chat requires a callable");
    }
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner) : inner_(std::move(inner)) {
    if (!inner_) {
        throw ConfigError("caching embedder requires an inner embedder");
    }
}

std::size_t CachingEmbedder::cache_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
}

Embedding CachingEmbedder::compute(const std::string& text) {
    std::string key = inner_->name();
    key.push_back('\0');
    key += text;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            return it->second;
        }
    }
    Embedding v = inner_->embed(text);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(std::move(key), v);
    return v;
}

} // namespace hopgraph
