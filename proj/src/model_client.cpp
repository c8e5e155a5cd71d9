#include "nldeval/model_client.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "nldeval/hash.hpp"

namespace nldeval {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string host;    // scheme://host:port
    std::string prefix;  // path prefix, may be empty
};

SplitUrl split_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    size_t path_start =
        scheme_end == std::string::npos ? base_url.find('/') : base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

// POSTs with retry/backoff per the endpoint policy. Returns the response body
// of a 2xx reply.
std::string post_json(const ModelEndpoint& ep, const std::string& route, const json& body) {
    const SplitUrl url = split_url(ep.base_url);
    httplib::Client client(url.host);
    client.set_connection_timeout(std::chrono::duration<double>(ep.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(ep.timeout_s));

    httplib::Headers headers;
    if (!ep.api_key_env.empty()) {
        if (const char* key = std::getenv(ep.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string payload = body.dump();
    std::string last_error;
    int last_status = 0;
    std::string last_body;

    for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
        if (attempt > 0) {
            long wait_ms = static_cast<long>(ep.backoff_initial_ms) << (attempt - 1);
            wait_ms = std::min(wait_ms, 30000L);
            std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
        }
        auto res = client.Post(url.prefix + route, headers, payload, "application/json");
        if (!res) {
            auto err = res.error();
            last_error = httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                if (attempt == ep.max_retries)
                    throw TimeoutError("timeout talking to " + ep.base_url + route + ": " +
                                       last_error);
            } else if (attempt == ep.max_retries) {
                throw NetworkError("cannot reach " + ep.base_url + route + ": " + last_error);
            }
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        last_status = res->status;
        last_body = res->body.substr(0, 200);
        if (!retryable_status(res->status)) throw HttpStatusError(res->status, last_body);
    }
    if (last_status != 0) throw HttpStatusError(last_status, last_body);
    throw NetworkError("cannot reach " + ep.base_url + route + ": " + last_error);
}

json messages_to_json(const PromptBundle& bundle) {
    json msgs = json::array();
    for (const auto& m : bundle.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return msgs;
}

}  // namespace

CompletionResult HttpChatBackend::complete(const ModelEndpoint& ep, const PromptBundle& bundle,
                                           const DecodingParams& params) {
    json body = {
        {"model", ep.model_id},
        {"messages", messages_to_json(bundle)},
        {"temperature", params.temperature},
        {"top_p", params.top_p},
        {"max_tokens", params.max_tokens},
    };
    if (params.seed) body["seed"] = *params.seed;

    auto start = std::chrono::steady_clock::now();
    const std::string reply = post_json(ep, "/chat/completions", body);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    json j;
    try {
        j = json::parse(reply);
    } catch (const json::parse_error& e) {
        throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
        !j["choices"][0].contains("message") || !j["choices"][0]["message"].contains("content") ||
        !j["choices"][0]["message"]["content"].is_string())
        throw MalformedResponseError("missing choices[0].message.content");

    CompletionResult result;
    result.text = j["choices"][0]["message"]["content"].get<std::string>();
    result.model_id = ep.model_id;
    result.latency_ms = static_cast<long>(elapsed);
    if (j.contains("usage") && j["usage"].is_object()) {
        const auto& u = j["usage"];
        if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number())
            result.prompt_tokens = u["prompt_tokens"].get<int>();
        if (u.contains("completion_tokens") && u["completion_tokens"].is_number())
            result.completion_tokens = u["completion_tokens"].get<int>();
    }
    return result;
}

EmbeddingMatrix HttpEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw EmptyInputError("embed() requires at least one text");
    for (const auto& t : texts)
        if (t.empty()) throw EmptyInputError("embed() texts must be non-empty");

    json body = {{"model", ep_.model_id}, {"input", texts}};
    const std::string reply = post_json(ep_, "/embeddings", body);

    json j;
    try {
        j = json::parse(reply);
    } catch (const json::parse_error& e) {
        throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
    }
    if (!j.contains("data") || !j["data"].is_array() || j["data"].size() != texts.size())
        throw MalformedResponseError("embeddings data has wrong row count");

    EmbeddingMatrix matrix;
    for (const auto& row : j["data"]) {
        if (!row.contains("embedding") || !row["embedding"].is_array())
            throw MalformedResponseError("missing data[i].embedding");
        std::vector<double> vec;
        for (const auto& v : row["embedding"]) {
            if (!v.is_number()) throw MalformedResponseError("non-numeric embedding component");
            vec.push_back(v.get<double>());
        }
        if (matrix.rows.empty())
            matrix.dimension = vec.size();
        else if (vec.size() != matrix.dimension)
            throw DimensionMismatchError("embedding rows differ in dimension");
        matrix.rows.push_back(std::move(vec));
    }
    if (matrix.dimension == 0) throw MalformedResponseError("zero-dimensional embeddings");
    return matrix;
}

namespace {

// Small fixed vocabulary the mock draws from; descriptions stay one line and
// well under 50 words so compliance checks pass on mock runs.
const std::vector<std::string>& mock_vocab() {
    static const std::vector<std::string> vocab = {
        "computes", "returns",  "iterates", "allocates", "checks",  "updates", "reads",
        "writes",   "the",      "a",        "value",     "buffer",  "list",    "index",
        "result",   "input",    "output",   "counter",   "pointer", "string",  "array",
        "element",  "function", "loop",     "sum",       "maximum", "minimum", "state",
        "memory",   "node",     "size",     "over",      "of",      "and",     "into",
        "from",     "each",     "given",    "stored",    "total",
    };
    return vocab;
}

// Pull identifier-like words out of the user message so mock outputs share some
// vocabulary with the code under test.
std::vector<std::string> identifier_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            if (cur.size() >= 3 && cur != "int" && cur != "return") words.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 3) words.push_back(cur);
    return words;
}

}  // namespace

CompletionResult MockBackend::complete(const ModelEndpoint& ep, const PromptBundle& bundle,
                                       const DecodingParams& params) {
    uint64_t h = fnv1a64(bundle.content_hash);
    h = fnv1a64(ep.model_id, h);
    h = fnv1a64_mix(h, seed_);
    if (params.seed) h = fnv1a64_mix(h, *params.seed);
    SplitMix64 rng(h);

    std::vector<std::string> idents;
    for (auto it = bundle.messages.rbegin(); it != bundle.messages.rend(); ++it) {
        if (it->role == "user") {
            idents = identifier_words(it->content);
            break;
        }
    }

    const auto& vocab = mock_vocab();
    const size_t n_words = 8 + rng.below(12);
    std::string text = "This code";
    for (size_t i = 0; i < n_words; ++i) {
        text += ' ';
        if (!idents.empty() && rng.below(4) == 0)
            text += idents[rng.below(idents.size())];
        else
            text += vocab[rng.below(vocab.size())];
    }
    text += '.';

    CompletionResult result;
    result.text = std::move(text);
    result.model_id = ep.model_id;
    result.latency_ms = 0;  // mock is clock-independent by contract
    return result;
}

std::vector<double> MockBackend::embed_one(const std::string& text) const {
    std::vector<double> acc(kDim, 0.0);
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        uint64_t h = fnv1a64_mix(fnv1a64(cur), seed_);
        acc[h % kDim] += ((h >> 7) & 1) ? 1.0 : -1.0;
        cur.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();

    double norm = 0.0;
    for (double v : acc) norm += v * v;
    if (norm == 0.0) {
        acc[0] = 1.0;  // empty or fully cancelled text maps to a fixed unit vector
        return acc;
    }
    norm = std::sqrt(norm);
    for (double& v : acc) v /= norm;
    return acc;
}

EmbeddingMatrix MockBackend::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw EmptyInputError("embed() requires at least one text");
    for (const auto& t : texts)
        if (t.empty()) throw EmptyInputError("embed() texts must be non-empty");
    EmbeddingMatrix matrix;
    matrix.dimension = kDim;
    matrix.rows.reserve(texts.size());
    for (const auto& t : texts) matrix.rows.push_back(embed_one(t));
    return matrix;
}

std::unique_ptr<ChatBackend> make_chat_backend(const ModelEndpoint& ep) {
    if (is_mock_endpoint(ep)) return std::make_unique<MockBackend>(ep.mock_seed);
    return std::make_unique<HttpChatBackend>();
}

std::unique_ptr<Embedder> make_embedder(const ModelEndpoint& ep) {
    if (is_mock_endpoint(ep)) return std::make_unique<MockBackend>(ep.mock_seed);
    return std::make_unique<HttpEmbedder>(ep);
}

}  // namespace nldeval
