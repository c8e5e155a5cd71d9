#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "nldeval/errors.hpp"
#include "nldeval/model_client.hpp"
#include "nldeval/prompting.hpp"

using namespace nldeval;
using nlohmann::json;

namespace {

// In-process HTTP stub bound to an ephemeral port.
class StubServer {
public:
    StubServer() = default;
    ~StubServer() { stop(); }

    void start() {
        port_ = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    void stop() {
        server.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    httplib::Server server;

private:
    int port_ = 0;
    std::thread thread_;
};

ModelEndpoint make_endpoint(const std::string& base_url) {
    ModelEndpoint ep;
    ep.model_id = "stub-model";
    ep.base_url = base_url;
    ep.max_retries = 2;
    ep.backoff_initial_ms = 1;
    ep.timeout_s = 5.0;
    return ep;
}

CodeExample make_example() {
    CodeExample ex;
    ex.id = "ex1";
    ex.lang_token = "c";
    ex.lang = Lang::C;
    ex.code = "int add(int a, int b) { return a + b; }";
    ex.reference = "Adds two integers.";
    return ex;
}

std::string chat_reply(const std::string& content) {
    json j = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})},
              {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 7}}}};
    return j.dump();
}

}  // namespace

TEST_CASE("chat request carries decoding params, messages, and bearer auth") {
    setenv("NLDEVAL_TEST_KEY", "sk-stub-123", 1);
    StubServer stub;
    json seen_body;
    std::string seen_auth;
    stub.server.Post("/v1/chat/completions",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         seen_body = json::parse(req.body);
                         if (req.has_header("Authorization"))
                             seen_auth = req.get_header_value("Authorization");
                         res.set_content(chat_reply("A stub description."), "application/json");
                     });
    stub.start();

    ModelEndpoint ep = make_endpoint(stub.base_url() + "/v1");
    ep.api_key_env = "NLDEVAL_TEST_KEY";
    const auto bundle =
        build_generator_prompt(PromptStyle::ConciseOneLine, builtin_guidance(), make_example());

    HttpChatBackend backend;
    DecodingParams params;
    params.seed = 42;
    const auto result = backend.complete(ep, bundle, params);

    CHECK(result.text == "A stub description.");
    CHECK(result.model_id == "stub-model");
    CHECK(result.prompt_tokens == 12);
    CHECK(result.completion_tokens == 7);

    CHECK(seen_auth == "Bearer sk-stub-123");
    CHECK(seen_body["model"] == "stub-model");
    CHECK(seen_body["temperature"].get<double>() == doctest::Approx(0.7));
    CHECK(seen_body["top_p"].get<double>() == doctest::Approx(0.9));
    CHECK(seen_body["max_tokens"] == 256);
    CHECK(seen_body["seed"] == 42);
    REQUIRE(seen_body["messages"].size() == 2);
    CHECK(seen_body["messages"][0]["role"] == "system");
    CHECK(seen_body["messages"][0]["content"] == bundle.messages[0].content);
    CHECK(seen_body["messages"][1]["role"] == "user");
}

TEST_CASE("429 is retried with backoff, then succeeds") {
    StubServer stub;
    std::atomic<int> attempts{0};
    stub.server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (attempts.fetch_add(1) == 0) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
        } else {
            res.set_content(chat_reply("second try"), "application/json");
        }
    });
    stub.start();

    HttpChatBackend backend;
    const auto bundle = build_generator_prompt(PromptStyle::ZeroShotInstruction, {}, make_example());
    const auto result = backend.complete(make_endpoint(stub.base_url()), bundle, {});
    CHECK(result.text == "second try");
    CHECK(attempts.load() == 2);
}

TEST_CASE("retries exhausted on persistent 503") {
    StubServer stub;
    std::atomic<int> attempts{0};
    stub.server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        attempts.fetch_add(1);
        res.status = 503;
    });
    stub.start();

    HttpChatBackend backend;
    const auto bundle = build_generator_prompt(PromptStyle::ZeroShotInstruction, {}, make_example());
    ModelEndpoint ep = make_endpoint(stub.base_url());  // max_retries = 2
    CHECK_THROWS_AS(backend.complete(ep, bundle, {}), HttpStatusError);
    CHECK(attempts.load() == 3);  // initial attempt + 2 retries
}

TEST_CASE("client errors are not retried") {
    StubServer stub;
    std::atomic<int> attempts{0};
    stub.server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        attempts.fetch_add(1);
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    stub.start();

    HttpChatBackend backend;
    const auto bundle = build_generator_prompt(PromptStyle::ZeroShotInstruction, {}, make_example());
    try {
        backend.complete(make_endpoint(stub.base_url()), bundle, {});
        FAIL("expected HttpStatusError");
    } catch (const HttpStatusError& e) {
        CHECK(e.status == 400);
    }
    CHECK(attempts.load() == 1);
}

TEST_CASE("malformed completions raise MalformedResponseError") {
    StubServer stub;
    stub.server.Post("/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        if (body["model"] == "not-json")
            res.set_content("<html>oops</html>", "text/html");
        else
            res.set_content(R"({"choices":[{"message":{"role":"assistant"}}]})",
                            "application/json");
    });
    stub.start();

    HttpChatBackend backend;
    const auto bundle = build_generator_prompt(PromptStyle::ZeroShotInstruction, {}, make_example());
    ModelEndpoint ep = make_endpoint(stub.base_url());
    ep.model_id = "not-json";
    CHECK_THROWS_AS(backend.complete(ep, bundle, {}), MalformedResponseError);
    ep.model_id = "no-content";
    CHECK_THROWS_AS(backend.complete(ep, bundle, {}), MalformedResponseError);
}

TEST_CASE("connection failure raises NetworkError") {
    ModelEndpoint ep = make_endpoint("http://127.0.0.1:1");
    ep.max_retries = 0;
    HttpChatBackend backend;
    const auto bundle = build_generator_prompt(PromptStyle::ZeroShotInstruction, {}, make_example());
    CHECK_THROWS_AS(backend.complete(ep, bundle, {}), NetworkError);
}

TEST_CASE("embeddings round-trip over the wire") {
    StubServer stub;
    json seen_body;
    stub.server.Post("/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = json::parse(req.body);
        json data = json::array();
        for (size_t i = 0; i < seen_body["input"].size(); ++i)
            data.push_back({{"embedding", {0.5 * (i + 1), 0.0, 1.0}}});
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    stub.start();

    HttpEmbedder embedder(make_endpoint(stub.base_url()));
    const auto matrix = embedder.embed({"first text", "second text"});
    CHECK(seen_body["model"] == "stub-model");
    CHECK(seen_body["input"] == json({"first text", "second text"}));
    REQUIRE(matrix.rows.size() == 2);
    CHECK(matrix.dimension == 3);
    CHECK(matrix.rows[0] == std::vector<double>{0.5, 0.0, 1.0});
    CHECK(matrix.rows[1] == std::vector<double>{1.0, 0.0, 1.0});
}

TEST_CASE("embeddings with inconsistent rows are rejected") {
    StubServer stub;
    stub.server.Post("/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data":[{"embedding":[1.0,2.0]},{"embedding":[1.0]}]})",
                        "application/json");
    });
    stub.start();

    HttpEmbedder embedder(make_endpoint(stub.base_url()));
    CHECK_THROWS_AS(embedder.embed({"a", "b"}), DimensionMismatchError);
}

TEST_CASE("mock completions are a pure function of prompt, model, and seeds") {
    MockBackend mock(11);
    ModelEndpoint ep;
    ep.model_id = "mock-a";
    ep.base_url = "mock://";
    const auto bundle =
        build_generator_prompt(PromptStyle::ConciseOneLine, builtin_guidance(), make_example());
    DecodingParams params;
    params.seed = 1234;

    const auto a = mock.complete(ep, bundle, params);
    const auto b = mock.complete(ep, bundle, params);
    CHECK(a.text == b.text);
    CHECK(a.latency_ms == 0);
    CHECK_FALSE(a.text.empty());
    CHECK(a.text.back() == '.');
    CHECK(a.text.rfind("This code", 0) == 0);

    // Different model, different mock seed, different decoding seed: all shift output.
    ModelEndpoint other = ep;
    other.model_id = "mock-b";
    CHECK(mock.complete(other, bundle, params).text != a.text);
    MockBackend mock2(12);
    CHECK(mock2.complete(ep, bundle, params).text != a.text);
    DecodingParams params2;
    params2.seed = 99;
    CHECK(mock.complete(ep, bundle, params2).text != a.text);
}

TEST_CASE("mock embeddings are unit-norm, deterministic, and order independent") {
    MockBackend mock(7);
    const auto m1 = mock.embed({"computes a sum", "walks the list"});
    const auto m2 = mock.embed({"walks the list", "computes a sum"});
    REQUIRE(m1.rows.size() == 2);
    CHECK(m1.rows[0] == m2.rows[1]);
    CHECK(m1.rows[1] == m2.rows[0]);

    for (const auto& row : m1.rows) {
        double norm = 0.0;
        for (double v : row) norm += v * v;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }

    double dot = 0.0;
    for (size_t i = 0; i < m1.rows[0].size(); ++i) dot += m1.rows[0][i] * m1.rows[1][i];
    CHECK(dot < 1.0 - 1e-6);  // unrelated texts are not collinear

    CHECK_THROWS_AS(mock.embed({}), EmptyInputError);
}

TEST_CASE("backend factories dispatch on the url scheme") {
    ModelEndpoint mock_ep;
    mock_ep.base_url = "mock://";
    mock_ep.mock_seed = 3;
    CHECK(is_mock_endpoint(mock_ep));
    CHECK(dynamic_cast<MockBackend*>(make_chat_backend(mock_ep).get()) != nullptr);
    CHECK(dynamic_cast<MockBackend*>(make_embedder(mock_ep).get()) != nullptr);

    ModelEndpoint http_ep;
    http_ep.base_url = "http://127.0.0.1:9999";
    CHECK_FALSE(is_mock_endpoint(http_ep));
    CHECK(dynamic_cast<HttpChatBackend*>(make_chat_backend(http_ep).get()) != nullptr);
    CHECK(dynamic_cast<HttpEmbedder*>(make_embedder(http_ep).get()) != nullptr);
}
