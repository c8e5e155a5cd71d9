#include "nldeval/config.hpp"

#include <fstream>

#include "json.hpp"

namespace nldeval {

using nlohmann::json;

namespace {

ModelEndpoint endpoint_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": endpoint must be an object");
    ModelEndpoint ep;
    ep.model_id = j.value("model_id", "");
    ep.base_url = j.value("base_url", "");
    ep.api_key_env = j.value("api_key_env", "");
    ep.timeout_s = j.value("timeout_s", 30.0);
    ep.max_retries = j.value("max_retries", 2);
    ep.backoff_initial_ms = j.value("backoff_initial_ms", 1000);
    ep.mock_seed = j.value("mock_seed", 0ULL);
    if (ep.model_id.empty()) throw ConfigError(where + ".model_id: must be non-empty");
    if (ep.base_url.empty()) throw ConfigError(where + ".base_url: must be non-empty");
    if (ep.timeout_s <= 0) throw ConfigError(where + ".timeout_s: must be > 0");
    if (ep.max_retries < 0) throw ConfigError(where + ".max_retries: must be >= 0");
    return ep;
}

}  // namespace

HarnessConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    HarnessConfig cfg;
    cfg.corpus_path = j.value("corpus", "");
    if (cfg.corpus_path.empty()) throw ConfigError("corpus: path is required");
    cfg.output_dir = j.value("output_dir", "runs");
    cfg.exemplar_path = j.value("exemplars", "");

    if (!j.contains("models") || !j["models"].is_array() || j["models"].empty())
        throw ConfigError("models: at least one model endpoint is required");
    for (size_t i = 0; i < j["models"].size(); ++i)
        cfg.models.push_back(endpoint_from_json(j["models"][i], "models[" + std::to_string(i) + "]"));

    if (j.contains("embedding")) {
        cfg.embedding = endpoint_from_json(j["embedding"], "embedding");
    } else {
        cfg.embedding.model_id = "mock-embedder";
        cfg.embedding.base_url = "mock://";
        cfg.embedding.mock_seed = 7;
    }

    const json run = j.value("run", json::object());
    const std::string style_name = run.value("style", "concise_one_line");
    auto style = parse_style(style_name);
    if (!style) throw ConfigError("run.style: unknown style \"" + style_name + "\"");
    cfg.run.style = *style;

    // Guidance selection: "all", "none", or a list of 1-based point indices.
    const json guidance = run.value("guidance", json("all"));
    if (guidance.is_string()) {
        const std::string g = guidance.get<std::string>();
        if (g == "all")
            cfg.run.guidance = builtin_guidance();
        else if (g != "none")
            throw ConfigError("run.guidance: expected \"all\", \"none\", or an index list");
    } else if (guidance.is_array()) {
        for (const auto& v : guidance) {
            if (!v.is_number_integer()) throw ConfigError("run.guidance: indices must be integers");
            const int idx = v.get<int>();
            if (idx < 1 || idx > static_cast<int>(builtin_guidance().size()))
                throw ConfigError("run.guidance: index " + std::to_string(idx) +
                                  " out of range 1.." + std::to_string(builtin_guidance().size()));
            cfg.run.guidance.push_back(builtin_guidance()[idx - 1]);
        }
    } else {
        throw ConfigError("run.guidance: expected \"all\", \"none\", or an index list");
    }

    const json dec = run.value("decoding", json::object());
    cfg.run.decoding.temperature = dec.value("temperature", 0.7);
    cfg.run.decoding.top_p = dec.value("top_p", 0.9);
    cfg.run.decoding.max_tokens = dec.value("max_tokens", 256);
    if (dec.contains("seed")) cfg.run.decoding.seed = dec["seed"].get<uint64_t>();

    cfg.run.refine_iterations = run.value("refine_iterations", 1);
    const std::string stop = run.value("refine_stop", "fixed");
    if (stop == "fixed")
        cfg.run.refine_stop = RefineStop::Fixed;
    else if (stop == "stop_when_unchanged")
        cfg.run.refine_stop = RefineStop::StopWhenUnchanged;
    else
        throw ConfigError("run.refine_stop: expected \"fixed\" or \"stop_when_unchanged\"");
    cfg.run.parallelism = run.value("parallelism", 4);
    cfg.run.run_id = run.value("run_id", "");

    const json met = j.value("metrics", json::object());
    cfg.metrics.bleu_max_n = met.value("bleu_max_n", 4);
    if (met.contains("bleu_weights"))
        cfg.metrics.bleu_weights = met["bleu_weights"].get<std::vector<double>>();
    const std::string smoothing = met.value("bleu_smoothing", "epsilon");
    if (smoothing == "none")
        cfg.metrics.bleu_smoothing = BleuSmoothing::None;
    else if (smoothing == "epsilon")
        cfg.metrics.bleu_smoothing = BleuSmoothing::Epsilon;
    else if (smoothing == "add_one")
        cfg.metrics.bleu_smoothing = BleuSmoothing::AddOne;
    else
        throw ConfigError("metrics.bleu_smoothing: expected none|epsilon|add_one");
    cfg.metrics.rouge_beta = met.value("rouge_beta", 1.2);
    cfg.metrics.meteor_alpha = met.value("meteor_alpha", 0.9);
    cfg.metrics.meteor_beta = met.value("meteor_beta", 3.0);
    cfg.metrics.meteor_gamma = met.value("meteor_gamma", 0.5);
    cfg.metrics.meteor_stemming = met.value("meteor_stemming", true);
    cfg.metrics.meteor_synonym_table = met.value("meteor_synonym_table", "");
    cfg.metrics.bertscore_idf = met.value("bertscore_idf", false);
    cfg.metrics.bertscore_rescale = met.value("bertscore_rescale", false);
    cfg.metrics.bertscore_rescale_baseline = met.value("bertscore_rescale_baseline", 0.0);
    cfg.metrics.mauve_clusters = met.value("mauve_clusters", 0);
    cfg.metrics.mauve_scaling_c = met.value("mauve_scaling_c", 5.0);
    cfg.metrics.mauve_frontier_points = met.value("mauve_frontier_points", 25);
    cfg.metrics.mauve_seed = met.value("mauve_seed", 1ULL);

    validate_config(cfg);
    return cfg;
}

void validate_config(const HarnessConfig& cfg) {
    const auto& d = cfg.run.decoding;
    if (d.temperature < 0)
        throw ConfigError("run.decoding.temperature: must be >= 0, got " +
                          std::to_string(d.temperature));
    if (d.top_p <= 0 || d.top_p > 1)
        throw ConfigError("run.decoding.top_p: must be in (0, 1], got " + std::to_string(d.top_p));
    if (d.max_tokens <= 0) throw ConfigError("run.decoding.max_tokens: must be > 0");
    if (cfg.run.refine_iterations < 0 || cfg.run.refine_iterations > 5)
        throw ConfigError("run.refine_iterations: must be in 0..5, got " +
                          std::to_string(cfg.run.refine_iterations));
    if (cfg.run.parallelism < 1) throw ConfigError("run.parallelism: must be >= 1");
    if (cfg.models.empty()) throw ConfigError("models: at least one model endpoint is required");

    const auto& m = cfg.metrics;
    if (m.bleu_max_n < 1) throw ConfigError("metrics.bleu_max_n: must be >= 1");
    if (!m.bleu_weights.empty()) {
        if (static_cast<int>(m.bleu_weights.size()) != m.bleu_max_n)
            throw ConfigError("metrics.bleu_weights: length must equal bleu_max_n");
        double sum = 0;
        for (double w : m.bleu_weights) {
            if (w < 0) throw ConfigError("metrics.bleu_weights: weights must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("metrics.bleu_weights: weights must sum to 1");
    }
    if (m.rouge_beta <= 0) throw ConfigError("metrics.rouge_beta: must be > 0");
    if (m.meteor_alpha < 0 || m.meteor_alpha > 1)
        throw ConfigError("metrics.meteor_alpha: must be in [0, 1]");
    if (m.meteor_gamma < 0 || m.meteor_gamma > 1)
        throw ConfigError("metrics.meteor_gamma: must be in [0, 1]");
    if (m.mauve_clusters < 0) throw ConfigError("metrics.mauve_clusters: must be >= 0 (0 = auto)");
    if (m.mauve_scaling_c <= 0) throw ConfigError("metrics.mauve_scaling_c: must be > 0");
    if (m.mauve_frontier_points < 1)
        throw ConfigError("metrics.mauve_frontier_points: must be >= 1");
}

}  // namespace nldeval
