#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nldeval/corpus.hpp"
#include "nldeval/model_client.hpp"
#include "nldeval/prompting.hpp"

namespace nldeval {

struct Refinement {
    int iteration = 0;  // 1-based, contiguous
    std::string output;
};

struct GenerationRecord {
    std::string example_id;
    std::string model_id;
    PromptStyle style = PromptStyle::ConciseOneLine;
    std::string initial_output;
    std::vector<Refinement> refinements;
    std::string final_output;  // last refinement, or initial_output
    std::vector<std::string> guidance_violations;
    long latency_total_ms = 0;
    std::string created_at;  // ISO-8601 UTC
    std::optional<std::string> error;  // set when the cell failed outright
    std::optional<std::string> refine_failure;  // a refinement call failed; record still valid
};

enum class RefineStop { Fixed, StopWhenUnchanged };

struct RunConfig {
    PromptStyle style = PromptStyle::ConciseOneLine;
    std::vector<GuidancePoint> guidance;
    DecodingParams decoding;
    int refine_iterations = 1;  // capped at 5
    RefineStop refine_stop = RefineStop::Fixed;
    int parallelism = 1;
    std::string run_id;
    std::vector<CodeExample> exemplars;  // few-shot style only; empty = built-in
};

struct RunArtifacts {
    std::vector<GenerationRecord> records;  // canonical order, failed cells included
    RunConfig config_snapshot;
    std::string corpus_digest;
    size_t failed_cells = 0;
    size_t skipped_cells = 0;  // satisfied from an earlier run with the same run_id
};

std::string record_to_json_line(const GenerationRecord& rec);
GenerationRecord record_from_json_line(const std::string& line);

GenerationRecord generate_initial(const CodeExample& ex, ChatBackend& backend,
                                  const ModelEndpoint& ep, const RunConfig& cfg);

// Appends up to cfg.refine_iterations refinement rounds. A failed call keeps the
// previous output as final and notes the failure in guidance_violations-adjacent
// error field; it never voids the record.
GenerationRecord refine(GenerationRecord rec, const CodeExample& ex, ChatBackend& backend,
                        const ModelEndpoint& ep, const RunConfig& cfg);

// Runs every (example, endpoint) cell once with a bounded worker pool, appending
// to runs_root/{run_id}/generations.jsonl as cells finish and rewriting the log
// in canonical (corpus-major, model-minor) order at the end. Rerunning with the
// same run_id skips cells already present in the log. Throws only when every
// cell failed.
RunArtifacts run_pipeline(const Corpus& corpus, const std::vector<ModelEndpoint>& endpoints,
                          const RunConfig& cfg, const std::string& runs_root);

// Collapse internal whitespace runs and trim; the StopWhenUnchanged comparison.
std::string normalize_whitespace(const std::string& text);

std::vector<GenerationRecord> load_run_log(const std::string& path);

}  // namespace nldeval
