// Test-only brute-force oracles. These deliberately avoid the data structures
// and algorithms of the library implementations: BLEU counts n-grams by direct
// scanning, ROUGE-L enumerates candidate subsequences, METEOR enumerates every
// injective alignment. Only usable for short sequences.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nldeval/metrics.hpp"

namespace oracles {

using nldeval::MetricConfig;
using nldeval::TokenSeq;

using Tokens = std::vector<std::string>;

// --- BLEU ------------------------------------------------------------------

inline int count_ngram_occurrences(const Tokens& seq, const Tokens& gram) {
    if (gram.empty() || seq.size() < gram.size()) return 0;
    int count = 0;
    for (size_t i = 0; i + gram.size() <= seq.size(); ++i) {
        bool match = true;
        for (size_t k = 0; k < gram.size(); ++k)
            if (seq[i + k] != gram[k]) {
                match = false;
                break;
            }
        if (match) ++count;
    }
    return count;
}

inline double bleu_oracle(const Tokens& cand, const std::vector<Tokens>& refs,
                          const MetricConfig& cfg) {
    const size_t c = cand.size();
    if (c == 0) return 0.0;

    size_t ref_len = refs[0].size();
    for (const auto& ref : refs) {
        auto dist = [&](size_t l) { return l > c ? l - c : c - l; };
        if (dist(ref.size()) < dist(ref_len) ||
            (dist(ref.size()) == dist(ref_len) && ref.size() < ref_len))
            ref_len = ref.size();
    }

    double log_sum = 0.0, weight_sum = 0.0;
    for (int n = 1; n <= cfg.bleu_max_n; ++n) {
        if (c < static_cast<size_t>(n)) continue;
        const double w =
            cfg.bleu_weights.empty() ? 1.0 / cfg.bleu_max_n : cfg.bleu_weights[n - 1];
        long clipped = 0;
        const long total = static_cast<long>(c) - n + 1;
        // For each distinct candidate n-gram (first occurrence wins), clip its
        // candidate count by the max reference count.
        for (size_t i = 0; i + n <= c; ++i) {
            Tokens gram(cand.begin() + i, cand.begin() + i + n);
            bool seen_before = false;
            for (size_t j = 0; j < i && !seen_before; ++j) {
                Tokens prev(cand.begin() + j, cand.begin() + j + n);
                seen_before = (prev == gram);
            }
            if (seen_before) continue;
            const int cand_count = count_ngram_occurrences(cand, gram);
            int ref_count = 0;
            for (const auto& ref : refs)
                ref_count = std::max(ref_count, count_ngram_occurrences(ref, gram));
            clipped += std::min(cand_count, ref_count);
        }
        double p;
        if (clipped > 0)
            p = static_cast<double>(clipped) / static_cast<double>(total);
        else if (cfg.bleu_smoothing == nldeval::BleuSmoothing::Epsilon)
            p = cfg.bleu_epsilon;
        else if (cfg.bleu_smoothing == nldeval::BleuSmoothing::AddOne)
            p = 1.0 / static_cast<double>(total + 1);
        else
            return 0.0;
        log_sum += w * std::log(p);
        weight_sum += w;
    }
    if (weight_sum == 0.0) return 0.0;
    const double geo = std::exp(log_sum / weight_sum);
    const double bp =
        c < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(c)) : 1.0;
    return std::min(1.0, bp * geo);
}

// --- ROUGE-L ---------------------------------------------------------------

inline bool is_subsequence(const Tokens& needle, const Tokens& haystack) {
    size_t j = 0;
    for (size_t i = 0; i < haystack.size() && j < needle.size(); ++i)
        if (haystack[i] == needle[j]) ++j;
    return j == needle.size();
}

// LCS by enumerating all subsequences of the candidate (O(2^n)).
inline int lcs_oracle(const Tokens& cand, const Tokens& ref) {
    const size_t n = cand.size();
    int best = 0;
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        Tokens sub;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.push_back(cand[i]);
        if (static_cast<int>(sub.size()) > best && is_subsequence(sub, ref))
            best = static_cast<int>(sub.size());
    }
    return best;
}

struct PRFOracle {
    double p = 0, r = 0, f = 0;
};

inline PRFOracle rouge_l_oracle(const Tokens& cand, const Tokens& ref, double beta) {
    PRFOracle out;
    if (cand.empty() || ref.empty()) return out;
    const double lcs = lcs_oracle(cand, ref);
    out.p = lcs / static_cast<double>(cand.size());
    out.r = lcs / static_cast<double>(ref.size());
    const double denom = out.r + beta * beta * out.p;
    out.f = denom > 0 ? (1 + beta * beta) * out.p * out.r / denom : 0.0;
    return out;
}

// --- METEOR ----------------------------------------------------------------

// Enumerates every injective partial alignment; keeps those whose per-stage
// match counts are lexicographically maximal (exact first, then stem, then
// synonym) and among them the minimal chunk count.
class MeteorOracle {
public:
    MeteorOracle(const Tokens& cand, const Tokens& ref, const MetricConfig& cfg,
                 const nldeval::SynonymTable* synonyms)
        : cand_(cand), ref_(ref) {
        stage_.assign(cand.size(), std::vector<int>(ref.size(), -1));
        for (size_t i = 0; i < cand.size(); ++i)
            for (size_t j = 0; j < ref.size(); ++j) {
                if (cand[i] == ref[j])
                    stage_[i][j] = 0;
                else if (cfg.meteor_stemming && nldeval::stem(cand[i]) == nldeval::stem(ref[j]))
                    stage_[i][j] = 1;
                else if (synonyms && synonyms->related(cand[i], ref[j]))
                    stage_[i][j] = 2;
            }
        used_.assign(ref.size(), false);
    }

    // Returns (matches, chunks) of the best alignment.
    std::pair<int, int> solve() {
        best_counts_ = {-1, -1, -1};
        best_chunks_ = 0;
        pairs_.clear();
        recurse(0);
        const int m = best_counts_[0] + best_counts_[1] + best_counts_[2];
        return {std::max(0, m), m > 0 ? best_chunks_ : 0};
    }

private:
    void consider_leaf() {
        std::array<int, 3> counts = {0, 0, 0};
        for (const auto& [i, j] : pairs_) ++counts[stage_[i][j]];
        if (counts < best_counts_) return;

        int chunks = 0;
        if (!pairs_.empty()) {
            auto sorted = pairs_;
            std::sort(sorted.begin(), sorted.end());
            chunks = 1;
            for (size_t k = 1; k < sorted.size(); ++k)
                if (sorted[k].first != sorted[k - 1].first + 1 ||
                    sorted[k].second != sorted[k - 1].second + 1)
                    ++chunks;
        }
        if (counts > best_counts_ || chunks < best_chunks_) {
            best_counts_ = counts;
            best_chunks_ = chunks;
        }
    }

    void recurse(size_t i) {
        if (i == cand_.size()) {
            consider_leaf();
            return;
        }
        recurse(i + 1);  // candidate token i unmatched
        for (size_t j = 0; j < ref_.size(); ++j) {
            if (used_[j] || stage_[i][j] < 0) continue;
            used_[j] = true;
            pairs_.emplace_back(static_cast<int>(i), static_cast<int>(j));
            recurse(i + 1);
            pairs_.pop_back();
            used_[j] = false;
        }
    }

    const Tokens& cand_;
    const Tokens& ref_;
    std::vector<std::vector<int>> stage_;
    std::vector<bool> used_;
    std::vector<std::pair<int, int>> pairs_;
    std::array<int, 3> best_counts_{};
    int best_chunks_ = 0;
};

inline double meteor_oracle(const Tokens& cand, const Tokens& ref, const MetricConfig& cfg,
                            const nldeval::SynonymTable* synonyms = nullptr) {
    if (cand.empty() || ref.empty()) return 0.0;
    MeteorOracle oracle(cand, ref, cfg, synonyms);
    const auto [matches, chunks] = oracle.solve();
    if (matches == 0) return 0.0;
    const double m = matches;
    const double p = m / static_cast<double>(cand.size());
    const double r = m / static_cast<double>(ref.size());
    const double f = p * r / (cfg.meteor_alpha * p + (1.0 - cfg.meteor_alpha) * r);
    const double penalty =
        cfg.meteor_gamma * std::pow(static_cast<double>(chunks) / m, cfg.meteor_beta);
    return f * (1.0 - penalty);
}

inline TokenSeq to_seq(const Tokens& tokens) {
    TokenSeq seq;
    seq.tokens = tokens;
    return seq;
}

}  // namespace oracles
