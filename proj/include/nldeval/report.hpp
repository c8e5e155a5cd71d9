#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nldeval/metrics.hpp"

namespace nldeval {

struct ModelSummary {
    std::string model_id;
    double mean_bleu = 0.0;
    double mean_rouge_l_f = 0.0;
    double mean_meteor = 0.0;
    double mean_bert_f = 0.0;
    size_t record_count = 0;
    size_t bert_count = 0;  // records that contributed to mean_bert_f
    std::optional<double> mauve;
};

struct CorrelationMatrix {
    std::vector<std::string> metric_names;
    std::vector<std::vector<double>> values;  // symmetric, unit diagonal
};

struct ComparisonTable {
    std::string text;  // aligned, human-readable
    std::string csv;
};

struct EvaluationReport {
    std::string run_id;
    std::vector<ModelSummary> summaries;
    CorrelationMatrix correlations;
    // Fixed metric order: BLEU, ROUGE-L, METEOR, BERTScore.
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> stacked;
    std::vector<std::string> heatmap_models;
    std::vector<std::string> heatmap_metrics;
    std::vector<std::vector<double>> heatmap;       // model x metric
    std::vector<size_t> heatmap_min_row;            // per metric: row holding the min
    std::vector<size_t> heatmap_max_row;            // per metric: row holding the max
};

// Per-model arithmetic means; cards with an absent bert field are excluded from
// that mean only. Model order follows first appearance in the card list.
std::vector<ModelSummary> aggregate(const std::vector<ScoreCard>& cards);

ComparisonTable comparison_table(const std::vector<ModelSummary>& summaries,
                                 std::optional<std::string> sort_by_metric = std::nullopt,
                                 bool descending = true);

// Pearson r over pooled per-record (bleu, rouge_l_f, meteor, bert_f) vectors.
// Zero-variance metric: r = 0 off-diagonal, 1 on the diagonal.
CorrelationMatrix metric_correlations(const std::vector<ScoreCard>& cards);

std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>>
stacked_contributions(const std::vector<ModelSummary>& summaries);

EvaluationReport build_report(const std::string& run_id, const std::vector<ScoreCard>& cards,
                              const std::vector<std::pair<std::string, double>>& mauve_by_model);

// Writes summary.csv, scores.csv, correlations.csv, stacked.csv, heatmap.csv,
// report.json. Byte-deterministic for identical input. Returns written paths.
std::vector<std::string> export_report(const EvaluationReport& report,
                                       const std::vector<ScoreCard>& cards,
                                       const std::string& out_dir);

std::string scores_to_csv(const std::vector<ScoreCard>& cards);
std::vector<ScoreCard> scores_from_csv(const std::string& csv);

}  // namespace nldeval
