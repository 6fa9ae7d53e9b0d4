#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "hopgraph/errors.hpp"
#include "hopgraph/http_provider.hpp"
#include "hopgraph/providers.hpp"

using namespace hopgraph;

namespace {

// In-process HTTP server bound to an ephemeral port for the test's life.
struct TestServer {
    httplib::Server srv;
    std::thread thread;
    int port = 0;

    void start() {
        port = srv.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { srv.listen_after_bind(); });
        srv.wait_until_ready();
    }

    ~TestServer() {
        srv.stop();
        if (thread.joinable()) {
            thread.join();
        }
    }

    std::string endpoint(const std::string& base = "/v1") const {
        return "http://127.0.0.1:" + std::to_string(port) + base;
    }
};

ProviderConfig chat_config(const TestServer& server, const std::string& base = "/v1") {
    ProviderConfig cfg;
    cfg.endpoint = server.endpoint(base);
    cfg.model_name = "test-model";
    cfg.timeout_ms = 2000;
    cfg.max_retries = 2;
    return cfg;
}

std::string chat_body(const std::string& content, int prompt_tokens = -1,
                      int completion_tokens = -1) {
    nlohmann::json doc = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
    if (prompt_tokens >= 0) {
        doc["usage"] = {{"prompt_tokens", prompt_tokens},
                        {"completion_tokens", completion_tokens}};
    }
    return doc.dump();
}

} // namespace

// ============================================================
// Chat round trips
// ============================================================

TEST_CASE("chat posts an OpenAI-shaped payload and reads the reply") {
    TestServer server;
    nlohmann::json seen_payload;
    std::string seen_auth;
    server.srv.Post("/v1/chat/completions",
                    [&](const httplib::Request& req, httplib::Response& res) {
                        seen_payload = nlohmann::json::parse(req.body);
                        seen_auth = req.get_header_value("Authorization");
                        res.set_content(chat_body("the reply", 11, 7), "application/json");
                    });
    server.start();

    ProviderConfig cfg = chat_config(server);
    cfg.api_key = "k123";
    cfg.temperature = 0.5;
    cfg.max_tokens = 64;
    OpenAiChatClient client(cfg);
    CHECK(client.name() == "openai-chat:test-model");

    CHECK(client.chat("hello server") == "the reply");

    CHECK(seen_auth == "Bearer k123");
    CHECK(seen_payload.at("model") == "test-model");
    CHECK(seen_payload.at("temperature") == 0.5);
    CHECK(seen_payload.at("max_tokens") == 64);
    REQUIRE(seen_payload.at("messages").size() == 1);
    CHECK(seen_payload.at("messages")[0].at("role") == "user");
    CHECK(seen_payload.at("messages")[0].at("content") == "hello server");

    // Server-reported usage wins over the whitespace estimate.
    auto log = client.exchanges();
    REQUIRE(log.size() == 1);
    CHECK(log[0].input_tokens == 11);
    CHECK(log[0].output_tokens == 7);
}

TEST_CASE("the auth header is omitted without an api key") {
    TestServer server;
    std::atomic<bool> had_auth{true};
    server.srv.Post("/v1/chat/completions",
                    [&](const httplib::Request& req, httplib::Response& res) {
                        had_auth = req.has_header("Authorization");
                        res.set_content(chat_body("ok"), "application/json");
                    });
    server.start();

    OpenAiChatClient client(chat_config(server));
    CHECK(client.chat("x") == "ok");
    CHECK_FALSE(had_auth.load());

    // Without usage in the reply, token counts fall back to the estimate.
    CHECK(client.exchanges()[0].input_tokens == 1);
}

TEST_CASE("endpoints without a path prefix post to the bare route") {
    TestServer server;
    std::atomic<int> hits{0};
    server.srv.Post("/chat/completions",
                    [&](const httplib::Request&, httplib::Response& res) {
                        ++hits;
                        res.set_content(chat_body("bare"), "application/json");
                    });
    server.start();

    OpenAiChatClient client(chat_config(server, ""));
    CHECK(client.chat("x") == "bare");
    CHECK(hits == 1);

    // A trailing slash on the endpoint is equivalent.
    ProviderConfig cfg = chat_config(server, "/");
    OpenAiChatClient client2(cfg);
    CHECK(client2.chat("y") == "bare");
}

// ============================================================
// Retries
// ============================================================

TEST_CASE("retryable statuses are retried until the server recovers") {
    int failures = 0;
    SUBCASE("500 then success") { failures = 500; }
    SUBCASE("429 then success") { failures = 429; }

    TestServer server;
    std::atomic<int> calls{0};
    server.srv.Post("/v1/chat/completions",
                    [&](const httplib::Request&, httplib::Response& res) {
                        if (++calls == 1) {
                            res.status = failures;
                            res.set_content("busy", "text/plain");
                        } else {
                            res.set_content(chat_body("recovered"), "application/json");
                        }
                    });
    server.start();

    OpenAiChatClient client(chat_config(server));
    client.set_backoff_ms(1);
    CHECK(client.chat("x") == "recovered");
    CHECK(calls == 2);
}

TEST_CASE("persistent failures raise a provider error with the last status") {
    TestServer server;
    std::atomic<int> calls{0};
    server.srv.Post("/v1/chat/completions",
                    [&](const httplib::Request&, httplib::Response& res) {
                        ++calls;
                        res.status = 503;
                        res.set_content("down", "text/plain");
                    });
    server.start();

    ProviderConfig cfg = chat_config(server);
    cfg.max_retries = 2;
    OpenAiChatClient client(cfg);
    client.set_backoff_ms(1);

    try {
        (void)client.chat("x");
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 503);
        CHECK(std::string(e.what()).find("3 attempt(s)") != std::string::npos);
        CHECK(std::string(e.what()).find("down") != std::string::npos);
    }
    CHECK(calls == 3); // initial attempt + two retries
}

TEST_CASE("client errors are not retried") {
    TestServer server;
    std::atomic<int> calls{0};
    server.srv.Post("/v1/chat/completions",
                    [&](const httplib::Request&, httplib::Response& res) {
                        ++calls;
                        res.status = 404;
                        res.set_content("no such model", "text/plain");
                    });
    server.start();

    OpenAiChatClient client(chat_config(server));
    client.set_backoff_ms(1);
    try {
        (void)client.chat("x");
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 404);
    }
    CHECK(calls == 1);
}

TEST_CASE("transport failures carry status zero") {
    // Nothing listens on the port once the server stops.
    int dead_port = 0;
    {
        TestServer server;
        server.start();
        dead_port = server.port;
    }

    ProviderConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(dead_port) + "/v1";
    cfg.model_name = "test-model";
    cfg.timeout_ms = 200;
    cfg.max_retries = 1;
    OpenAiChatClient client(cfg);
    client.set_backoff_ms(1);

    try {
        (void)client.chat("x");
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 0);
        CHECK(std::string(e.what()).find("transport error") != std::string::npos);
    }
}

// ============================================================
// Malformed responses
// ============================================================

TEST_CASE("malformed 200 responses fail without retrying") {
    TestServer server;
    std::atomic<int> calls{0};
    std::string body;
    SUBCASE("not JSON at all") { body = "<html>oops</html>"; }
    SUBCASE("JSON with the wrong shape") { body = R"({"unexpected": true})"; }

    server.srv.Post("/v1/chat/completions",
                    [&](const httplib::Request&, httplib::Response& res) {
                        ++calls;
                        res.set_content(body, "application/json");
                    });
    server.start();

    OpenAiChatClient client(chat_config(server));
    client.set_backoff_ms(1);
    try {
        (void)client.chat("x");
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 200);
    }
    CHECK(calls == 1);
}

// ============================================================
// Embeddings
// ============================================================

TEST_CASE("the embedder posts the text and reads the vector") {
    TestServer server;
    nlohmann::json seen;
    server.srv.Post("/v1/embeddings", [&](const httplib::Request& req,
                                          httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        res.set_content(R"({"data": [{"embedding": [0.25, -0.5, 1.0]}]})", "application/json");
    });
    server.start();

    OpenAiEmbedder emb(chat_config(server), 3);
    CHECK(emb.name() == "openai-embed:test-model");
    CHECK(emb.dim() == 3);

    Embedding v = emb.embed("embed this");
    CHECK(v.values == std::vector<float>{0.25f, -0.5f, 1.0f});
    CHECK(seen.at("model") == "test-model");
    CHECK(seen.at("input") == "embed this");
}

TEST_CASE("a vector of the wrong length is a dimension error") {
    TestServer server;
    server.srv.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data": [{"embedding": [0.1, 0.2]}]})", "application/json");
    });
    server.start();

    OpenAiEmbedder emb(chat_config(server), 3);
    CHECK_THROWS_AS((void)emb.embed("text"), DimensionError);
}

TEST_CASE("embedding responses with the wrong shape are provider errors") {
    TestServer server;
    server.srv.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data": []})", "application/json");
    });
    server.start();

    OpenAiEmbedder emb(chat_config(server), 3);
    CHECK_THROWS_AS((void)emb.embed("text"), ProviderError);
}

// ============================================================
// Construction guards
// ============================================================

TEST_CASE("provider construction validates its configuration") {
    ProviderConfig cfg;
    cfg.endpoint = "http://localhost:9/v1";
    cfg.model_name = "m";
    CHECK_NOTHROW(OpenAiChatClient{cfg});
    CHECK_NOTHROW(OpenAiEmbedder(cfg, 4));

    ProviderConfig no_model = cfg;
    no_model.model_name.clear();
    CHECK_THROWS_AS(OpenAiChatClient{no_model}, ConfigError);
    CHECK_THROWS_AS(OpenAiEmbedder(no_model, 4), ConfigError);

    ProviderConfig no_scheme = cfg;
    no_scheme.endpoint = "localhost:8080/v1";
    CHECK_THROWS_AS(OpenAiChatClient{no_scheme}, ConfigError);

    ProviderConfig empty = cfg;
    empty.endpoint.clear();
    CHECK_THROWS_AS(OpenAiChatClient{empty}, ConfigError);

    CHECK_THROWS_AS(OpenAiEmbedder(cfg, 0), ConfigError);
}
