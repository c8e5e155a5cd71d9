// nldeval: generate natural-language descriptions of C/C++ snippets through
// chat-completion endpoints, score them against references, and emit
// comparative reports.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "nldeval/config.hpp"
#include "nldeval/corpus.hpp"
#include "nldeval/mauve.hpp"
#include "nldeval/metrics.hpp"
#include "nldeval/pipeline.hpp"
#include "nldeval/report.hpp"

namespace fs = std::filesystem;
using namespace nldeval;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfigError = 2;
constexpr int kFatal = 3;

struct CommonArgs {
    std::string config_path;
    std::string run_id;
    long sample_n = -1;
    uint64_t seed = 42;
    bool force = false;
    int parallelism = 0;  // 0 = use config value
};

std::string timestamp_run_id() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "run-%Y%m%d-%H%M%S", &tm);
    return buf;
}

HarnessConfig load_and_apply(const CommonArgs& args) {
    HarnessConfig cfg = load_config(args.config_path);
    if (!args.run_id.empty()) cfg.run.run_id = args.run_id;
    if (cfg.run.run_id.empty()) cfg.run.run_id = timestamp_run_id();
    if (args.parallelism > 0) cfg.run.parallelism = args.parallelism;
    if (!cfg.exemplar_path.empty()) cfg.run.exemplars = load_exemplars(cfg.exemplar_path);
    return cfg;
}

Corpus load_working_corpus(const HarnessConfig& cfg, const CommonArgs& args) {
    Corpus corpus = load_corpus(cfg.corpus_path);
    if (args.sample_n >= 0)
        corpus = sample_corpus(corpus, static_cast<size_t>(args.sample_n), args.seed);
    return corpus;
}

int cmd_validate(const CommonArgs& args) {
    HarnessConfig cfg;
    Corpus corpus;
    try {
        cfg = load_and_apply(args);
        corpus = load_working_corpus(cfg, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }

    const CorpusStats stats = corpus_stats(corpus);
    std::cout << "corpus: " << cfg.corpus_path << '\n';
    std::cout << "examples: " << stats.count << '\n';
    for (const auto& [lang, count] : stats.per_lang)
        std::cout << "  " << lang << ": " << count << '\n';
    std::cout << "reference words: min " << stats.reference_words.min << ", mean "
              << stats.reference_words.mean << ", max " << stats.reference_words.max << '\n';
    std::cout << "models: " << cfg.models.size() << '\n';
    for (const auto& ep : cfg.models) std::cout << "  " << ep.model_id << " @ " << ep.base_url << '\n';
    std::cout << "style: " << style_info(cfg.run.style).name << ", guidance points: "
              << cfg.run.guidance.size() << '\n';
    std::cout << "decoding: temperature " << cfg.run.decoding.temperature << ", top_p "
              << cfg.run.decoding.top_p << ", max_tokens " << cfg.run.decoding.max_tokens << '\n';

    if (!corpus.warnings.empty()) {
        for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << '\n';
        return kConfigError;
    }
    return kOk;
}

int cmd_generate(const CommonArgs& args) {
    HarnessConfig cfg;
    Corpus corpus;
    try {
        cfg = load_and_apply(args);
        corpus = load_working_corpus(cfg, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }

    if (args.force) {
        const fs::path run_dir = fs::path(cfg.output_dir) / cfg.run.run_id;
        fs::remove(run_dir / "generations.jsonl");
        fs::remove(run_dir / "errors.jsonl");
    }

    try {
        const RunArtifacts artifacts = run_pipeline(corpus, cfg.models, cfg.run, cfg.output_dir);
        std::cout << "run " << cfg.run.run_id << ": " << artifacts.records.size() << " cells, "
                  << artifacts.failed_cells << " failed, " << artifacts.skipped_cells
                  << " resumed\n";
        return artifacts.failed_cells > 0 ? kPartial : kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFatal;
    }
}

int cmd_score(const CommonArgs& args) {
    HarnessConfig cfg;
    Corpus corpus;
    try {
        cfg = load_and_apply(args);
        corpus = load_working_corpus(cfg, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }

    const fs::path run_dir = fs::path(cfg.output_dir) / cfg.run.run_id;
    const fs::path log_path = run_dir / "generations.jsonl";
    if (!fs::exists(log_path)) {
        std::cerr << "error: no generations found at " << log_path << '\n';
        return kConfigError;
    }

    std::map<std::string, const CodeExample*> by_id;
    for (const auto& ex : corpus.examples) by_id[ex.id] = &ex;

    std::vector<GenerationRecord> records;
    try {
        records = load_run_log(log_path.string());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }

    auto embedder = make_embedder(cfg.embedding);
    std::unordered_map<std::string, double> idf;
    if (cfg.metrics.bertscore_idf) {
        std::vector<std::string> refs;
        for (const auto& ex : corpus.examples) refs.push_back(ex.reference);
        idf = idf_weights(refs);
    }
    SynonymTable synonyms;
    if (!cfg.metrics.meteor_synonym_table.empty())
        synonyms = SynonymTable::load(cfg.metrics.meteor_synonym_table);

    std::vector<ScoreCard> cards;
    size_t skipped = 0;
    for (const auto& rec : records) {
        if (rec.error) {
            ++skipped;
            continue;
        }
        auto it = by_id.find(rec.example_id);
        if (it == by_id.end()) {
            std::cerr << "warning: record for unknown example " << rec.example_id << '\n';
            ++skipped;
            continue;
        }
        cards.push_back(score_record(rec, *it->second, *embedder, cfg.metrics,
                                     synonyms.empty() ? nullptr : &synonyms,
                                     cfg.metrics.bertscore_idf ? &idf : nullptr));
    }
    if (skipped > 0) std::cerr << skipped << " record(s) skipped\n";
    if (cards.empty()) {
        std::cerr << "error: no scorable records\n";
        return kConfigError;
    }

    {
        std::ofstream out(run_dir / "scores.csv", std::ios::trunc | std::ios::binary);
        out << scores_to_csv(cards);
    }

    // Corpus-level MAUVE per model: human references vs that model's outputs.
    std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> texts;
    for (const auto& rec : records) {
        if (rec.error) continue;
        auto it = by_id.find(rec.example_id);
        if (it == by_id.end()) continue;
        texts[rec.model_id].first.push_back(it->second->reference);
        texts[rec.model_id].second.push_back(rec.final_output);
    }
    std::ofstream mauve_out(run_dir / "mauve.csv", std::ios::trunc | std::ios::binary);
    mauve_out << "model_id,mauve,clusters\n";
    for (const auto& [model, pair] : texts) {
        try {
            const MauveResult result = mauve(pair.first, pair.second, *embedder, cfg.metrics);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12g", result.score);
            mauve_out << model << ',' << buf << ',' << result.cluster_count << '\n';
        } catch (const std::exception& e) {
            std::cerr << "warning: mauve skipped for " << model << ": " << e.what() << '\n';
        }
    }
    mauve_out.close();

    std::cout << "scored " << cards.size() << " record(s) -> " << (run_dir / "scores.csv").string()
              << '\n';
    return skipped > 0 ? kPartial : kOk;
}

int cmd_report(const CommonArgs& args) {
    HarnessConfig cfg;
    try {
        cfg = load_and_apply(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }

    const fs::path run_dir = fs::path(cfg.output_dir) / cfg.run.run_id;
    const fs::path scores_path = run_dir / "scores.csv";
    if (!fs::exists(scores_path)) {
        std::cerr << "error: no scores found at " << scores_path << '\n';
        return kConfigError;
    }

    std::ifstream in(scores_path);
    std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::vector<ScoreCard> cards = scores_from_csv(csv);
    if (cards.empty()) {
        std::cerr << "error: scores file is empty\n";
        return kConfigError;
    }

    std::vector<std::pair<std::string, double>> mauve_by_model;
    if (fs::exists(run_dir / "mauve.csv")) {
        std::ifstream min(run_dir / "mauve.csv");
        std::string line;
        std::getline(min, line);  // header
        while (std::getline(min, line)) {
            const size_t c1 = line.find(',');
            if (c1 == std::string::npos) continue;
            const size_t c2 = line.find(',', c1 + 1);
            mauve_by_model.emplace_back(line.substr(0, c1),
                                        std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        }
    }

    try {
        const EvaluationReport report = build_report(cfg.run.run_id, cards, mauve_by_model);
        export_report(report, cards, (run_dir / "report").string());
        std::cout << comparison_table(report.summaries).text;
        if (!mauve_by_model.empty()) {
            std::cout << "\nMAUVE (corpus-level)\n";
            for (const auto& [model, score] : mauve_by_model) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", score);
                std::cout << "  " << model << "  " << buf << '\n';
            }
        }
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFatal;
    }
}

int cmd_run(const CommonArgs& args) {
    int status = cmd_validate(args);
    if (status >= kConfigError) return status;

    // Keep one run_id across stages even when it came from the timestamp default.
    CommonArgs staged = args;
    if (staged.run_id.empty()) {
        try {
            staged.run_id = load_and_apply(args).run.run_id;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kConfigError;
        }
    }

    const int gen = cmd_generate(staged);
    if (gen >= kConfigError) return gen;
    const int score = cmd_score(staged);
    if (score >= kConfigError) return score;
    const int rep = cmd_report(staged);
    if (rep >= kConfigError) return rep;
    return std::max({gen, score, rep});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nldeval: code description generation and evaluation harness"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("--config", args.config_path, "Path to the JSON config file");
        if (needs_config) opt->required();
        cmd->add_option("--run-id", args.run_id, "Run identifier (default: timestamp slug)");
        cmd->add_option("--sample", args.sample_n, "Evaluate a deterministic corpus sample of N");
        cmd->add_option("--seed", args.seed, "Sampling seed");
        cmd->add_option("--parallelism", args.parallelism, "Worker pool size override");
        cmd->add_flag("--force", args.force, "Redo work even when artifacts exist");
    };

    auto* validate = app.add_subcommand("validate", "Check the config and corpus");
    add_common(validate);
    auto* generate = app.add_subcommand("generate", "Run the generate/refine pipeline");
    add_common(generate);
    auto* score = app.add_subcommand("score", "Score a finished run against references");
    add_common(score);
    auto* report = app.add_subcommand("report", "Aggregate scores into report files");
    add_common(report);
    auto* run = app.add_subcommand("run", "validate + generate + score + report");
    add_common(run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    if (validate->parsed()) return cmd_validate(args);
    if (generate->parsed()) return cmd_generate(args);
    if (score->parsed()) return cmd_score(args);
    if (report->parsed()) return cmd_report(args);
    if (run->parsed()) return cmd_run(args);
    return kConfigError;
}
