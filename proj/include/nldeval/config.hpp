#pragma once

#include <string>
#include <vector>

#include "nldeval/metrics.hpp"
#include "nldeval/model_client.hpp"
#include "nldeval/pipeline.hpp"

namespace nldeval {

struct HarnessConfig {
    std::string corpus_path;
    std::vector<ModelEndpoint> models;
    ModelEndpoint embedding;  // mock:// or a live embeddings endpoint
    RunConfig run;
    MetricConfig metrics;
    std::string output_dir = "runs";
    std::string exemplar_path;  // optional few-shot exemplar override
};

// Loads the JSON config file and applies defaults. Throws ConfigError naming
// the offending field and bound.
HarnessConfig load_config(const std::string& path);

void validate_config(const HarnessConfig& cfg);  // throws ConfigError

}  // namespace nldeval
