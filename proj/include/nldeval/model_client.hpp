#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nldeval/errors.hpp"
#include "nldeval/prompting.hpp"

namespace nldeval {

struct ModelEndpoint {
    std::string model_id;
    std::string base_url;     // "http://host:port[/prefix]" or "mock://"
    std::string api_key_env;  // name of the env var holding the bearer token
    double timeout_s = 30.0;
    int max_retries = 2;
    int backoff_initial_ms = 1000;  // doubles per retry, capped at 30 s
    uint64_t mock_seed = 0;         // only meaningful for mock:// endpoints
};

inline bool is_mock_endpoint(const ModelEndpoint& ep) {
    return ep.base_url.rfind("mock", 0) == 0;
}

struct DecodingParams {
    double temperature = 0.7;
    double top_p = 0.9;
    int max_tokens = 256;
    std::optional<uint64_t> seed;
};

struct CompletionResult {
    std::string text;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
    long latency_ms = 0;
    std::string model_id;
};

struct EmbeddingMatrix {
    std::vector<std::vector<double>> rows;
    size_t dimension = 0;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual CompletionResult complete(const ModelEndpoint& ep, const PromptBundle& bundle,
                                      const DecodingParams& params) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // Row i corresponds to texts[i]. texts must be non-empty.
    virtual EmbeddingMatrix embed(const std::vector<std::string>& texts) = 0;
};

// POST {base_url}/chat/completions and {base_url}/embeddings, bearer auth from
// the env var named in the endpoint. Retries 429/5xx/network failures with
// exponential backoff up to max_retries.
class HttpChatBackend : public ChatBackend {
public:
    CompletionResult complete(const ModelEndpoint& ep, const PromptBundle& bundle,
                              const DecodingParams& params) override;
};

class HttpEmbedder : public Embedder {
public:
    explicit HttpEmbedder(ModelEndpoint ep) : ep_(std::move(ep)) {}
    EmbeddingMatrix embed(const std::vector<std::string>& texts) override;

private:
    ModelEndpoint ep_;
};

// Offline backend. complete() is a pure function of (bundle content hash,
// model_id, seed); embed() maps the token multiset of each text to a unit
// vector of dimension kDim via seeded hashing. Thread-safe.
class MockBackend : public ChatBackend, public Embedder {
public:
    static constexpr size_t kDim = 64;

    explicit MockBackend(uint64_t seed) : seed_(seed) {}

    CompletionResult complete(const ModelEndpoint& ep, const PromptBundle& bundle,
                              const DecodingParams& params) override;
    EmbeddingMatrix embed(const std::vector<std::string>& texts) override;

    std::vector<double> embed_one(const std::string& text) const;

private:
    uint64_t seed_;
};

std::unique_ptr<ChatBackend> make_chat_backend(const ModelEndpoint& ep);
std::unique_ptr<Embedder> make_embedder(const ModelEndpoint& ep);

}  // namespace nldeval
