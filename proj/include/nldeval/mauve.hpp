#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nldeval/metrics.hpp"

namespace nldeval {

struct MauveResult {
    double score = 0.0;
    int cluster_count = 0;
    // (KL(P || mix), KL(Q || mix)) per mixture weight, P = human, Q = model.
    std::vector<std::pair<double, double>> frontier;
};

// Embeds both text sets, quantizes jointly with seeded k-means, and scores the
// divergence frontier between the resulting histograms. Deterministic for a
// fixed cfg.mauve_seed; single-threaded. Throws InsufficientSamplesError when
// either side has fewer than 2 texts.
MauveResult mauve(const std::vector<std::string>& human_texts,
                  const std::vector<std::string>& model_texts, Embedder& embedder,
                  const MetricConfig& cfg);

// Frontier over two histograms directly (no embedding/clustering); exposed for
// fixture tests and exact-histogram checks.
MauveResult mauve_from_histograms(const std::vector<double>& p, const std::vector<double>& q,
                                  const MetricConfig& cfg);

}  // namespace nldeval
