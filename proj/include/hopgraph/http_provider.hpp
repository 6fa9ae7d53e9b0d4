#pragma once

#include <string>

#include "hopgraph/providers.hpp"

namespace hopgraph {

// Chat client for OpenAI-compatible servers (POST {base}/chat/completions).
// Transport failures and HTTP 429/5xx are retried with exponential backoff
// up to config.max_retries extra attempts; the final failure surfaces as a
// ProviderError carrying the last HTTP status (0 for transport errors).
class OpenAiChatClient final : public ChatClient {
public:
    explicit OpenAiChatClient(ProviderConfig config);

    std::string name() const override;

    // Tests shrink this to keep retry paths fast. Milliseconds before the
    // first retry; doubles per attempt, capped at 2 s.
    void set_backoff_ms(int ms) { backoff_ms_ = ms; }

protected:
    std::string complete(const std::string& prompt) override;

private:
    ProviderConfig config_;
    int backoff_ms_ = 100;
};

// Embedding client for OpenAI-compatible servers (POST {base}/embeddings).
// The expected dimension is fixed up front; a server response with any
// other length trips a DimensionError at the call site.
class OpenAiEmbedder final : public Embedder {
public:
    OpenAiEmbedder(ProviderConfig config, std::size_t dim);

    std::size_t dim() const override { return dim_; }
    std::string name() const override;

    void set_backoff_ms(int ms) { backoff_ms_ = ms; }

protected:
    Embedding compute(const std::string& text) override;

private:
    ProviderConfig config_;
    std::size_t dim_;
    int backoff_ms_ = 100;
};

} // namespace hopgraph
