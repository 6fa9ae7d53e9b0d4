#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "hopgraph/errors.hpp"
#include "hopgraph/types.hpp"

namespace hopgraph {

// Connection settings for a remote model endpoint.
struct ProviderConfig {
    std::string endpoint;     // base URL, e.g. "http://127.0.0.1:8089/v1"
    std::string model_name;
    std::string api_key;      // empty = no Authorization header
    int timeout_ms = 30000;
    int max_retries = 2;      // extra attempts after the first
    double temperature = 0.0;
    int max_tokens = 512;

    // Throws ConfigError when a field is out of range.
    void validate() const;
};

// One chat round trip, kept for cost accounting and replay.
struct ChatExchange {
    std::string prompt;
    std::string response;
    std::size_t input_tokens = 0;   // whitespace-token estimate unless the server reports usage
    std::size_t output_tokens = 0;
    double latency_ms = 0.0;
};

// Appends one JSON object per line; shared by chat clients that mirror
// their traffic to disk. Thread safe.
class JsonlTraceWriter {
public:
    explicit JsonlTraceWriter(const std::string& path);
    void write_line(const std::string& json_line);

private:
    std::mutex mu_;
    std::ofstream out_;
};

// ============================================================
// Interfaces
// ============================================================

class Embedder {
public:
    virtual ~Embedder() = default;

    // Embeds non-empty text. The result always has dim() values; a
    // backend that returns anything else trips a DimensionError here.
    Embedding embed(const std::string& text);

    virtual std::size_t dim() const = 0;
    virtual std::string name() const = 0;

protected:
    virtual Embedding compute(const std::string& text) = 0;
};

class KeywordExtractor {
public:
    virtual ~KeywordExtractor() = default;
    virtual Keywords extract(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;

    // Sends one prompt, returns the reply, and logs the exchange.
    std::string chat(const std::string& prompt);

    virtual std::string name() const = 0;

    std::vector<ChatExchange> exchanges() const;
    std::size_t call_count() const;
    void mirror_to(std::shared_ptr<JsonlTraceWriter> sink);

protected:
    virtual std::string complete(const std::string& prompt) = 0;

    // Backends that learn real token usage call this from complete();
    // it overrides the whitespace estimate for the current exchange.
    static void report_usage(std::size_t input_tokens, std::size_t output_tokens);

private:
    mutable std::mutex mu_;
    std::vector<ChatExchange> log_;
    std::shared_ptr<JsonlTraceWriter> sink_;
};

// ============================================================
// Deterministic offline providers
// ============================================================

// Token-hash embedder: each token is case-folded, hashed with FNV-1a 64,
// and counted into bucket hash % dim; the bucket vector is L2-normalized.
// Same text, same vector — no network, no model weights.
class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim = 64);

    std::size_t dim() const override { return dim_; }
    std::string name() const override;

protected:
    Embedding compute(const std::string& text) override;

private:
    std::size_t dim_;
};

// Rule-based keyword extractor: tokens that were capitalized in the
// original text or contain a digit survive; everything is case-folded
// and a small stopword list is dropped.
class RuleKeywordExtractor final : public KeywordExtractor {
public:
    RuleKeywordExtractor();

    Keywords extract(const std::string& text) const override;
    std::string name() const override { return "rules"; }

private:
    std::vector<std::string> stopwords_; // sorted, folded
};

// Replays canned responses keyed by the exact prompt string. A prompt may
// map to a sequence (consumed in order; the last entry repeats). Unknown
// prompts raise ProviderError unless a default response is set.
class ScriptedChat final : public ChatClient {
public:
    ScriptedChat() = default;

    // Script file layout:
    //   {"entries": [{"prompt": "...", "responses": ["...", "..."]}],
    //    "default": "optional fallback"}
    // An entry may use "response": "..." for a single reply.
    static std::shared_ptr<ScriptedChat> from_file(const std::string& path);

    void add_response(const std::string& prompt, std::string response);
    void set_default(std::string response);

    std::string name() const override { return "scripted"; }

protected:
    std::string complete(const std::string& prompt) override;

private:
    std::mutex script_mu_;
    std::unordered_map<std::string, std::vector<std::string>> responses_;
    std::unordered_map<std::string, std::size_t> cursor_;
    bool has_default_ = false;
    std::string default_response_;
};

// Returns the prompt verbatim. Handy as a stand-in where the reply
// content does not matter.
class EchoChat final : public ChatClient {
public:
    std::string name() const override { return "echo"; }

protected:
    std::string complete(const std::string& prompt) override { return prompt; }
};

// Routes prompts to a callback. Tests use this for scripted reasoners
// that need to inspect the prompt instead of matching it exactly.
class CallbackChat final : public ChatClient {
public:
    using Fn = std::function<std::string(const std::string&)>;
    explicit CallbackChat(Fn fn, std::string name = "callback");

    std::string name() const override { return name_; }

protected:
    std::string complete(const std::string& prompt) override { return fn_(prompt); }

private:
    Fn fn_;
    std::string name_;
};

// Memoizes an inner embedder keyed by (embedder name, text). Thread safe.
class CachingEmbedder final : public Embedder {
public:
    explicit CachingEmbedder(std::shared_ptr<Embedder> inner);

    std::size_t dim() const override { return inner_->dim(); }
    std::string name() const override { return inner_->name(); }
    std::size_t cache_size() const;

protected:
    Embedding compute(const std::string& text) override;

private:
    std::shared_ptr<Embedder> inner_;
    mutable std::mutex mu_;
    std::map<std::string, Embedding> cache_;
};

// Whitespace token count used for usage estimates on offline providers.
std::size_t approx_token_count(const std::string& text);

} // namespace hopgraph
