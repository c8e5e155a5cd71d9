#include "nldeval/mauve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nldeval/hash.hpp"

namespace nldeval {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

// Seeded k-means++ then Lloyd iterations; returns the cluster assignment of
// each point. Single-threaded so results are reproducible bit-for-bit.
std::vector<int> kmeans_assign(const std::vector<std::vector<double>>& points, int k,
                               uint64_t seed) {
    const size_t n = points.size();
    const size_t dim = points[0].size();
    SplitMix64 rng(seed);

    // k-means++ seeding.
    std::vector<std::vector<double>> centers;
    centers.push_back(points[rng.below(n)]);
    std::vector<double> dist2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = sq_dist(points[i], centers[0]);
            for (size_t c = 1; c < centers.size(); ++c)
                best = std::min(best, sq_dist(points[i], centers[c]));
            dist2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);  // all points coincide with a center
        }
        centers.push_back(points[pick]);
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        for (size_t i = 0; i < n; ++i) {
            double best = sq_dist(points[i], centers[0]);
            int best_c = 0;
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], centers[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assign[i] = best_c;
        }

        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < n; ++i) {
            counts[assign[i]] += 1;
            for (size_t d = 0; d < dim; ++d) next[assign[i]][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seat an empty cluster on the point farthest from its center.
                size_t far = 0;
                double far_d = -1.0;
                for (size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(points[i], centers[assign[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                next[c] = points[far];
            } else {
                for (size_t d = 0; d < dim; ++d) next[c][d] /= static_cast<double>(counts[c]);
            }
        }

        double shift = 0.0;
        for (int c = 0; c < k; ++c) shift += sq_dist(centers[c], next[c]);
        centers = std::move(next);
        if (shift < 1e-6) break;
    }
    for (size_t i = 0; i < n; ++i) {
        double best = sq_dist(points[i], centers[0]);
        int best_c = 0;
        for (int c = 1; c < k; ++c) {
            const double d = sq_dist(points[i], centers[c]);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        assign[i] = best_c;
    }
    return assign;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    double kl = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return kl;
}

}  // namespace

MauveResult mauve_from_histograms(const std::vector<double>& p, const std::vector<double>& q,
                                  const MetricConfig& cfg) {
    MauveResult result;
    result.cluster_count = static_cast<int>(p.size());

    const int grid = std::max(1, cfg.mauve_frontier_points);
    const double c = cfg.mauve_scaling_c;

    // Exponentiated curve, anchored at (1,0) / (0,1); x = exp(-c KL(Q||mix)),
    // y = exp(-c KL(P||mix)).
    std::vector<std::pair<double, double>> curve;
    curve.emplace_back(1.0, 0.0);
    for (int i = 1; i <= grid; ++i) {
        const double lambda = static_cast<double>(i) / static_cast<double>(grid + 1);
        std::vector<double> mix(p.size());
        for (size_t b = 0; b < p.size(); ++b) mix[b] = lambda * p[b] + (1.0 - lambda) * q[b];
        const double kl_p = kl_divergence(p, mix);
        const double kl_q = kl_divergence(q, mix);
        result.frontier.emplace_back(kl_p, kl_q);
        curve.emplace_back(std::exp(-c * kl_q), std::exp(-c * kl_p));
    }
    curve.emplace_back(0.0, 1.0);

    // Trapezoidal area under the frontier, x ascending with ties kept monotone.
    std::sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });
    double area = 0.0;
    for (size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].first - curve[i - 1].first) *
                (curve[i].second + curve[i - 1].second) * 0.5;

    result.score = std::clamp(area, 0.0, 1.0);
    return result;
}

MauveResult mauve(const std::vector<std::string>& human_texts,
                  const std::vector<std::string>& model_texts, Embedder& embedder,
                  const MetricConfig& cfg) {
    if (human_texts.size() < 2 || model_texts.size() < 2)
        throw InsufficientSamplesError("mauve() requires at least 2 texts per side");

    std::vector<std::string> all = human_texts;
    all.insert(all.end(), model_texts.begin(), model_texts.end());
    for (auto& t : all)
        if (t.empty()) t = " ";  // keep row correspondence for blank outputs
    const EmbeddingMatrix emb = embedder.embed(all);

    const size_t n_h = human_texts.size();
    const size_t n_m = model_texts.size();
    int k = cfg.mauve_clusters > 0
                ? cfg.mauve_clusters
                : std::max<int>(2, static_cast<int>((n_h + n_m) / 10));
    k = std::min<int>(k, static_cast<int>(n_h + n_m));

    const std::vector<int> assign = kmeans_assign(emb.rows, k, cfg.mauve_seed);

    std::vector<double> p(k, 0.0), q(k, 0.0);
    for (size_t i = 0; i < n_h; ++i) p[assign[i]] += 1.0 / static_cast<double>(n_h);
    for (size_t i = 0; i < n_m; ++i) q[assign[n_h + i]] += 1.0 / static_cast<double>(n_m);

    return mauve_from_histograms(p, q, cfg);
}

}  // namespace nldeval
