#include "hopgraph/http_provider.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace hopgraph {

namespace {

struct ParsedEndpoint {
    std::string host;  // scheme://host:port
    std::string base;  // path prefix, may be empty
};

ParsedEndpoint parse_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must include a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    ParsedEndpoint out;
    if (path_start == std::string::npos) {
        out.host = url;
    } else {
        out.host = url.substr(0, path_start);
        out.base = url.substr(path_start);
        while (!out.base.empty() && out.base.back() == '/') {
            out.base.pop_back();
        }
    }
    return out;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) {
        return body;
    }
    return body.substr(0, kMax) + "...";
}

// POSTs JSON with retries; returns the parsed 200-response body.
nlohmann::json post_json(const ProviderConfig& config, const std::string& route,
                         const nlohmann::json& payload, int backoff_ms,
                         const char* what) {
    ParsedEndpoint ep = parse_endpoint(config.endpoint);
    std::string path = ep.base + route;
    std::string body = payload.dump();

    int attempts = config.max_retries + 1;
    int last_status = 0;
    std::string last_detail = "transport error";

    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            int wait = std::min(backoff_ms << (attempt - 1), 2000);
            std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        }

        httplib::Client cli(ep.host);
        cli.set_connection_timeout(0, config.timeout_ms * 1000LL);
        cli.set_read_timeout(0, config.timeout_ms * 1000LL);
        cli.set_write_timeout(0, config.timeout_ms * 1000LL);

        httplib::Headers headers;
        if (!config.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config.api_key);
        }

        auto res = cli.Post(path, headers, body, "application/json");
        if (!res) {
            last_status = 0;
            last_detail = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        if (res->status == 200) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw ProviderError(std::string(what) + ": server returned unparseable JSON: " +
                                        e.what(),
                                    res->status);
            }
        }
        last_detail = "HTTP " + std::to_string(res->status) + ": " + body_excerpt(res->body);
        if (!retryable_status(res->status)) {
            break;
        }
    }

    throw ProviderError(std::string(what) + " request to " + config.endpoint + route +
                            " failed after " + std::to_string(attempts) +
                            " attempt(s); last error: " + last_detail,
                        last_status);
}

} // namespace

// ============================================================
// OpenAiChatClient
// ============================================================

OpenAiChatClient::OpenAiChatClient(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.model_name.empty()) {
        throw ConfigError("chat provider requires a model name");
    }
    parse_endpoint(config_.endpoint); // fail fast on malformed URLs
}

std::string OpenAiChatClient::name() const {
    return "openai-chat:" + config_.model_name;
}

std::string OpenAiChatClient::complete(const std::string& prompt) {
    nlohmann::json payload = {
        {"model", config_.model_name},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config_.temperature},
        {"max_tokens", config_.max_tokens},
    };
    nlohmann::json doc = post_json(config_, "/chat/completions", payload, backoff_ms_, "chat");

    try {
        const auto& choice = doc.at("choices").at(0);
        std::string content = choice.at("message").at("content").get<std::string>();
        if (doc.contains("usage")) {
            const auto& usage = doc["usage"];
            report_usage(usage.value("prompt_tokens", 0), usage.value("completion_tokens", 0));
        }
        return content;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("chat: unexpected response shape: ") + e.what(), 200);
    }
}

// ============================================================
// OpenAiEmbedder
// ============================================================

OpenAiEmbedder::OpenAiEmbedder(ProviderConfig config, std::size_t dim)
    : config_(std::move(config)), dim_(dim) {
    config_.validate();
    if (config_.model_name.empty()) {
        throw ConfigError("embedding provider requires a model name");
    }
    if (dim_ == 0) {
        throw ConfigError("embedding dimension must be positive");
    }
    parse_endpoint(config_.endpoint);
}

std::string OpenAiEmbedder::name() const {
    return "openai-embed:" + config_.model_name;
}

Embedding OpenAiEmbedder::compute(const std::string& text) {
    nlohmann::json payload = {
        {"model", config_.model_name},
        {"input", text},
    };
    nlohmann::json doc = post_json(config_, "/embeddings", payload, backoff_ms_, "embeddings");

    try {
        const auto& values = doc.at("data").at(0).at("embedding");
        Embedding out;
        out.values.reserve(values.size());
        for (const auto& x : values) {
            out.values.push_back(x.get<float>());
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("embeddings: unexpected response shape: ") + e.what(),
                            200);
    }
}

} // namespace hopgraph
