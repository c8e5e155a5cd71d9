#include "nldeval/pipeline.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "nldeval/hash.hpp"

namespace nldeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string style_name_of(PromptStyle style) { return style_info(style).name; }

}  // namespace

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;  // leading whitespace is dropped
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out += ' ';
            out += c;
            in_space = false;
        }
    }
    return out;
}

std::string record_to_json_line(const GenerationRecord& rec) {
    json j;
    j["example_id"] = rec.example_id;
    j["model_id"] = rec.model_id;
    j["style"] = style_name_of(rec.style);
    j["initial_output"] = rec.initial_output;
    json refs = json::array();
    for (const auto& r : rec.refinements)
        refs.push_back({{"iteration", r.iteration}, {"output", r.output}});
    j["refinements"] = refs;
    j["final_output"] = rec.final_output;
    j["guidance_violations"] = rec.guidance_violations;
    j["latency_total_ms"] = rec.latency_total_ms;
    j["created_at"] = rec.created_at;
    if (rec.error) j["error"] = *rec.error;
    if (rec.refine_failure) j["refine_failure"] = *rec.refine_failure;
    return j.dump();
}

GenerationRecord record_from_json_line(const std::string& line) {
    json j = json::parse(line);
    GenerationRecord rec;
    rec.example_id = j.at("example_id").get<std::string>();
    rec.model_id = j.at("model_id").get<std::string>();
    if (auto s = parse_style(j.value("style", "concise_one_line"))) rec.style = *s;
    rec.initial_output = j.value("initial_output", "");
    for (const auto& r : j.value("refinements", json::array()))
        rec.refinements.push_back({r.at("iteration").get<int>(), r.at("output").get<std::string>()});
    rec.final_output = j.value("final_output", "");
    for (const auto& v : j.value("guidance_violations", json::array()))
        rec.guidance_violations.push_back(v.get<std::string>());
    rec.latency_total_ms = j.value("latency_total_ms", 0L);
    rec.created_at = j.value("created_at", "");
    if (j.contains("error")) rec.error = j["error"].get<std::string>();
    if (j.contains("refine_failure")) rec.refine_failure = j["refine_failure"].get<std::string>();
    return rec;
}

std::vector<GenerationRecord> load_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open run log: " + path);
    std::vector<GenerationRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json_line(line));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad record: ") + e.what(), line_no);
        }
    }
    return records;
}

GenerationRecord generate_initial(const CodeExample& ex, ChatBackend& backend,
                                  const ModelEndpoint& ep, const RunConfig& cfg) {
    GenerationRecord rec;
    rec.example_id = ex.id;
    rec.model_id = ep.model_id;
    rec.style = cfg.style;
    rec.created_at = utc_now_iso8601();

    const PromptBundle bundle =
        build_generator_prompt(cfg.style, cfg.guidance, ex,
                               cfg.exemplars.empty() ? nullptr : &cfg.exemplars);
    try {
        const CompletionResult result = backend.complete(ep, bundle, cfg.decoding);
        rec.initial_output = result.text;
        rec.final_output = result.text;
        rec.latency_total_ms = result.latency_ms;
        rec.guidance_violations =
            check_guidance_compliance(rec.final_output, cfg.guidance, cfg.style);
    } catch (const std::exception& e) {
        throw std::runtime_error("generation failed for (" + ex.id + ", " + ep.model_id +
                                 "): " + e.what());
    }
    return rec;
}

GenerationRecord refine(GenerationRecord rec, const CodeExample& ex, ChatBackend& backend,
                        const ModelEndpoint& ep, const RunConfig& cfg) {
    const int iterations = std::min(cfg.refine_iterations, 5);
    for (int it = 1; it <= iterations; ++it) {
        const std::string& previous =
            rec.refinements.empty() ? rec.initial_output : rec.refinements.back().output;
        PromptBundle bundle;
        try {
            bundle = build_refiner_prompt(ex, previous, cfg.style);
        } catch (const EmptyDraftError&) {
            break;  // nothing to refine
        }
        try {
            const CompletionResult result = backend.complete(ep, bundle, cfg.decoding);
            rec.latency_total_ms += result.latency_ms;
            if (cfg.refine_stop == RefineStop::StopWhenUnchanged &&
                normalize_whitespace(result.text) == normalize_whitespace(previous)) {
                rec.refinements.push_back({it, result.text});
                break;
            }
            rec.refinements.push_back({it, result.text});
        } catch (const std::exception& e) {
            // Keep the last good output; the failure is recorded, not fatal.
            rec.refine_failure =
                "refinement iteration " + std::to_string(it) + " failed: " + e.what();
            break;
        }
    }
    if (!rec.refinements.empty()) rec.final_output = rec.refinements.back().output;
    rec.guidance_violations = check_guidance_compliance(rec.final_output, cfg.guidance, cfg.style);
    return rec;
}

namespace {

std::string cell_key(const std::string& example_id, const std::string& model_id) {
    return example_id + "\x1f" + model_id;
}

json run_config_to_json(const RunConfig& cfg) {
    json j;
    j["run_id"] = cfg.run_id;
    j["style"] = style_name_of(cfg.style);
    json guidance = json::array();
    for (const auto& g : cfg.guidance) guidance.push_back(g.text);
    j["guidance"] = guidance;
    j["decoding"] = {{"temperature", cfg.decoding.temperature},
                     {"top_p", cfg.decoding.top_p},
                     {"max_tokens", cfg.decoding.max_tokens}};
    if (cfg.decoding.seed) j["decoding"]["seed"] = *cfg.decoding.seed;
    j["refine_iterations"] = cfg.refine_iterations;
    j["refine_stop"] = cfg.refine_stop == RefineStop::Fixed ? "fixed" : "stop_when_unchanged";
    j["parallelism"] = cfg.parallelism;
    return j;
}

}  // namespace

RunArtifacts run_pipeline(const Corpus& corpus, const std::vector<ModelEndpoint>& endpoints,
                          const RunConfig& cfg, const std::string& runs_root) {
    if (corpus.empty()) throw EmptyInputError("run_pipeline: corpus is empty");
    if (endpoints.empty()) throw EmptyInputError("run_pipeline: no model endpoints");
    if (cfg.run_id.empty()) throw ConfigError("run_pipeline: run_id is empty");

    const fs::path run_dir = fs::path(runs_root) / cfg.run_id;
    fs::create_directories(run_dir);
    const fs::path log_path = run_dir / "generations.jsonl";
    const fs::path errors_path = run_dir / "errors.jsonl";

    {
        std::ofstream cfg_out(run_dir / "config.json", std::ios::trunc);
        json snapshot = run_config_to_json(cfg);
        snapshot["corpus_digest"] = corpus_digest(corpus);
        cfg_out << snapshot.dump(2) << '\n';
    }

    // Resume: cells already in the log are not re-executed.
    std::unordered_map<std::string, GenerationRecord> done;
    if (fs::exists(log_path)) {
        for (auto& rec : load_run_log(log_path.string()))
            done.emplace(cell_key(rec.example_id, rec.model_id), std::move(rec));
    }

    struct Cell {
        size_t example_index;
        size_t endpoint_index;
    };
    std::vector<Cell> todo;
    size_t skipped = 0;
    for (size_t e = 0; e < corpus.size(); ++e) {
        for (size_t m = 0; m < endpoints.size(); ++m) {
            if (done.count(cell_key(corpus.examples[e].id, endpoints[m].model_id)))
                ++skipped;
            else
                todo.push_back({e, m});
        }
    }

    std::vector<std::unique_ptr<ChatBackend>> backends;
    backends.reserve(endpoints.size());
    for (const auto& ep : endpoints) backends.push_back(make_chat_backend(ep));

    std::mutex io_mutex;  // single writer for the append log and the done map
    std::ofstream append_log(log_path, std::ios::app);
    std::ofstream errors_log(errors_path, std::ios::app);
    std::atomic<size_t> next_cell{0};
    std::atomic<size_t> failures{0};

    auto worker = [&] {
        while (true) {
            const size_t i = next_cell.fetch_add(1);
            if (i >= todo.size()) break;
            const auto& cell = todo[i];
            const CodeExample& ex = corpus.examples[cell.example_index];
            const ModelEndpoint& ep = endpoints[cell.endpoint_index];
            GenerationRecord rec;
            bool failed = false;
            try {
                rec = generate_initial(ex, *backends[cell.endpoint_index], ep, cfg);
                if (cfg.refine_iterations > 0)
                    rec = refine(std::move(rec), ex, *backends[cell.endpoint_index], ep, cfg);
            } catch (const std::exception& e) {
                failed = true;
                rec = GenerationRecord{};
                rec.example_id = ex.id;
                rec.model_id = ep.model_id;
                rec.style = cfg.style;
                rec.created_at = utc_now_iso8601();
                rec.error = e.what();
            }
            std::lock_guard<std::mutex> lock(io_mutex);
            if (failed) {
                failures.fetch_add(1);
                errors_log << record_to_json_line(rec) << '\n';
                errors_log.flush();
            } else {
                append_log << record_to_json_line(rec) << '\n';
                append_log.flush();
            }
            done.emplace(cell_key(rec.example_id, rec.model_id), std::move(rec));
        }
    };

    const int threads = std::max(1, cfg.parallelism);
    if (threads == 1 || todo.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    append_log.close();
    errors_log.close();

    // Canonical order: corpus-major, model-minor; failed cells stay visible in
    // the artifacts but only successful ones live in generations.jsonl.
    RunArtifacts artifacts;
    artifacts.config_snapshot = cfg;
    artifacts.corpus_digest = corpus_digest(corpus);
    artifacts.skipped_cells = skipped;
    std::ofstream rewritten(log_path, std::ios::trunc);
    for (const auto& ex : corpus.examples) {
        for (const auto& ep : endpoints) {
            auto it = done.find(cell_key(ex.id, ep.model_id));
            if (it == done.end()) continue;
            if (!it->second.error) rewritten << record_to_json_line(it->second) << '\n';
            artifacts.records.push_back(it->second);
        }
    }
    rewritten.close();

    artifacts.failed_cells = 0;
    for (const auto& rec : artifacts.records)
        if (rec.error) ++artifacts.failed_cells;
    if (!artifacts.records.empty() && artifacts.failed_cells == artifacts.records.size())
        throw std::runtime_error("run_pipeline: every cell failed; see " + errors_path.string());
    return artifacts;
}

}  // namespace nldeval
