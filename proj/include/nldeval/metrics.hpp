#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nldeval/model_client.hpp"

namespace nldeval {

struct TokenSeq {
    std::vector<std::string> tokens;
    std::string source_text;

    bool empty() const { return tokens.empty(); }
    size_t size() const { return tokens.size(); }
};

// Default scheme: lowercase, split on whitespace, peel leading/trailing
// punctuation into separate tokens, drop empties.
TokenSeq tokenize(const std::string& text);

enum class BleuSmoothing { None, Epsilon, AddOne };

struct MetricConfig {
    int bleu_max_n = 4;
    std::vector<double> bleu_weights;  // empty = uniform over bleu_max_n
    BleuSmoothing bleu_smoothing = BleuSmoothing::Epsilon;
    double bleu_epsilon = 1e-9;

    double rouge_beta = 1.2;

    double meteor_alpha = 0.9;
    double meteor_beta = 3.0;
    double meteor_gamma = 0.5;
    bool meteor_stemming = true;
    std::string meteor_synonym_table;  // optional file path

    bool bertscore_idf = false;
    bool bertscore_rescale = false;
    double bertscore_rescale_baseline = 0.0;

    int mauve_clusters = 0;  // 0 = Auto: max(2, (n_human + n_model) / 10)
    double mauve_scaling_c = 5.0;
    int mauve_frontier_points = 25;
    uint64_t mauve_seed = 1;
};

struct PRF {
    double p = 0.0;
    double r = 0.0;
    double f = 0.0;
};

// Sentence BLEU: clipped modified n-gram precisions, geometric mean over the
// orders the candidate actually has n-grams for, brevity penalty against the
// closest reference length. Empty candidate scores 0.
double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references,
            const MetricConfig& cfg);

// LCS-based P/R and F_beta; all zeros when either side is empty.
PRF rouge_l(const TokenSeq& candidate, const TokenSeq& reference, double beta);

// One line per synonym set, tokens whitespace-separated.
class SynonymTable {
public:
    SynonymTable() = default;
    static SynonymTable load(const std::string& path);  // throws SynonymTableError
    void add_set(const std::vector<std::string>& tokens);
    bool related(const std::string& a, const std::string& b) const;
    bool empty() const { return sets_of_.empty(); }

private:
    std::unordered_map<std::string, std::vector<int>> sets_of_;
    int next_id_ = 0;
};

// Staged one-to-one alignment (exact -> stem -> synonym), harmonic-style
// F_mean = PR / (alpha*P + (1-alpha)*R), fragmentation penalty
// gamma * (chunks/matches)^beta with chunk count minimized over alignments
// that realize the per-stage match counts.
double meteor(const TokenSeq& candidate, const TokenSeq& reference, const MetricConfig& cfg,
              const SynonymTable* synonyms = nullptr);

// Greedy max-cosine matching over per-token embeddings from the provider.
// Optional idf weights (by token); unweighted when absent or when the flag is off.
PRF bert_score(const std::string& candidate, const std::string& reference, Embedder& embedder,
               const MetricConfig& cfg,
               const std::unordered_map<std::string, double>* idf = nullptr);

// IDF over a document collection, smoothed: log((N+1)/(df+1)).
std::unordered_map<std::string, double> idf_weights(const std::vector<std::string>& documents);

struct ScoreCard {
    std::string example_id;
    std::string model_id;
    double bleu = 0.0;
    PRF rouge_l;
    double meteor = 0.0;
    std::optional<PRF> bert;  // absent when the embedding provider failed
};

struct GenerationRecord;  // pipeline.hpp

ScoreCard score_record(const GenerationRecord& rec, const CodeExample& ex, Embedder& embedder,
                       const MetricConfig& cfg, const SynonymTable* synonyms = nullptr,
                       const std::unordered_map<std::string, double>* idf = nullptr);

// Lightweight rule-based suffix stripper used by the METEOR stem stage.
std::string stem(const std::string& token);

}  // namespace nldeval
