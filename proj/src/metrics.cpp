#include "nldeval/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "nldeval/pipeline.hpp"

namespace nldeval {

namespace {

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::string lowercase(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace

TokenSeq tokenize(const std::string& text) {
    TokenSeq seq;
    seq.source_text = text;
    std::istringstream in(text);
    std::string chunk;
    while (in >> chunk) {
        chunk = lowercase(chunk);
        // Peel leading punctuation, each character its own token.
        size_t begin = 0;
        while (begin < chunk.size() && is_punct(static_cast<unsigned char>(chunk[begin]))) {
            seq.tokens.push_back(std::string(1, chunk[begin]));
            ++begin;
        }
        size_t end = chunk.size();
        while (end > begin && is_punct(static_cast<unsigned char>(chunk[end - 1]))) --end;
        if (end > begin) seq.tokens.push_back(chunk.substr(begin, end - begin));
        // Trailing punctuation, preserving original order.
        for (size_t i = end; i < chunk.size(); ++i) seq.tokens.push_back(std::string(1, chunk[i]));
    }
    return seq;
}

std::string stem(const std::string& token) {
    auto ends_with = [&](const char* suffix) {
        size_t len = std::char_traits<char>::length(suffix);
        return token.size() >= len && token.compare(token.size() - len, len, suffix) == 0;
    };
    if (token.size() <= 3) return token;
    if (ends_with("sses")) return token.substr(0, token.size() - 2);
    if (ends_with("ies")) return token.substr(0, token.size() - 3) + "y";
    if (token.size() > 5 && ends_with("ing")) return token.substr(0, token.size() - 3);
    if (token.size() > 4 && ends_with("ed")) return token.substr(0, token.size() - 2);
    if (token.size() > 4 && ends_with("es")) return token.substr(0, token.size() - 2);
    if (ends_with("s") && !ends_with("ss") && !ends_with("us"))
        return token.substr(0, token.size() - 1);
    return token;
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            if (k) key += '\x1f';
            key += tokens[i + k];
        }
        counts[key] += 1;
    }
    return counts;
}

}  // namespace

double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references,
            const MetricConfig& cfg) {
    if (references.empty()) throw EmptyInputError("bleu() requires at least one reference");
    const size_t c = candidate.size();
    if (c == 0) return 0.0;

    const int max_n = cfg.bleu_max_n;
    std::vector<double> weights = cfg.bleu_weights;
    if (weights.empty()) weights.assign(max_n, 1.0 / max_n);
    if (static_cast<int>(weights.size()) != max_n)
        throw ConfigError("bleu_weights length must equal bleu_max_n");

    // Effective reference length: closest to the candidate, ties to the shorter.
    size_t ref_len = references[0].size();
    for (const auto& ref : references) {
        const size_t rl = ref.size();
        auto dist = [&](size_t l) { return l > c ? l - c : c - l; };
        if (dist(rl) < dist(ref_len) || (dist(rl) == dist(ref_len) && rl < ref_len)) ref_len = rl;
    }

    double log_sum = 0.0;
    double weight_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        if (c < static_cast<size_t>(n)) continue;  // no n-grams of this order
        const auto cand_counts = ngram_counts(candidate.tokens, n);
        std::map<std::string, int> ref_max;
        for (const auto& ref : references)
            for (const auto& [gram, count] : ngram_counts(ref.tokens, n))
                ref_max[gram] = std::max(ref_max[gram], count);
        long clipped = 0;
        long total = 0;
        for (const auto& [gram, count] : cand_counts) {
            auto it = ref_max.find(gram);
            clipped += std::min(count, it == ref_max.end() ? 0 : it->second);
            total += count;
        }
        double p;
        if (clipped > 0) {
            p = static_cast<double>(clipped) / static_cast<double>(total);
        } else {
            switch (cfg.bleu_smoothing) {
                case BleuSmoothing::None:
                    return 0.0;
                case BleuSmoothing::Epsilon:
                    p = cfg.bleu_epsilon;
                    break;
                case BleuSmoothing::AddOne:
                    p = 1.0 / static_cast<double>(total + 1);
                    break;
                default:
                    p = cfg.bleu_epsilon;
            }
        }
        log_sum += weights[n - 1] * std::log(p);
        weight_sum += weights[n - 1];
    }
    if (weight_sum == 0.0) return 0.0;

    const double geo_mean = std::exp(log_sum / weight_sum);
    double bp = 1.0;
    if (c < ref_len)
        bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(c));
    return std::clamp(bp * geo_mean, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// ROUGE-L

PRF rouge_l(const TokenSeq& candidate, const TokenSeq& reference, double beta) {
    PRF out;
    const size_t m = candidate.size();
    const size_t n = reference.size();
    if (m == 0 || n == 0) return out;

    std::vector<std::vector<int>> dp(m + 1, std::vector<int>(n + 1, 0));
    for (size_t i = 1; i <= m; ++i)
        for (size_t j = 1; j <= n; ++j)
            dp[i][j] = candidate.tokens[i - 1] == reference.tokens[j - 1]
                           ? dp[i - 1][j - 1] + 1
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    const double lcs = dp[m][n];
    out.p = lcs / static_cast<double>(m);
    out.r = lcs / static_cast<double>(n);
    const double denom = out.r + beta * beta * out.p;
    out.f = denom > 0.0 ? (1.0 + beta * beta) * out.p * out.r / denom : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Synonym table

SynonymTable SynonymTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SynonymTableError("cannot open synonym table: " + path);
    SynonymTable table;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(lowercase(tok));
        if (tokens.size() >= 2) table.add_set(tokens);
    }
    return table;
}

void SynonymTable::add_set(const std::vector<std::string>& tokens) {
    const int id = next_id_++;
    for (const auto& t : tokens) sets_of_[t].push_back(id);
}

bool SynonymTable::related(const std::string& a, const std::string& b) const {
    auto ia = sets_of_.find(a);
    auto ib = sets_of_.find(b);
    if (ia == sets_of_.end() || ib == sets_of_.end()) return false;
    for (int sa : ia->second)
        for (int sb : ib->second)
            if (sa == sb) return true;
    return false;
}

// ---------------------------------------------------------------------------
// METEOR
//
// Alignment semantics: stages run in order (exact, stem, synonym), each
// consuming still-unmatched tokens. Exact and stem equality are equivalence
// relations, so each stage's match count is the per-class minimum of the two
// sides' remaining counts; the synonym stage takes a maximum bipartite matching
// over what is left. The final pairing realizing those per-stage counts is then
// chosen to minimize the chunk count (branch-and-bound with a greedy witness as
// the initial bound and a node budget for pathological inputs).

namespace {

struct MeteorPair {
    int cand = -1;
    int ref = -1;
    int stage = 0;
};

int chunk_count(std::vector<MeteorPair> pairs) {
    if (pairs.empty()) return 0;
    std::sort(pairs.begin(), pairs.end(),
              [](const MeteorPair& a, const MeteorPair& b) { return a.cand < b.cand; });
    int chunks = 1;
    for (size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i].cand != pairs[i - 1].cand + 1 || pairs[i].ref != pairs[i - 1].ref + 1)
            ++chunks;
    return chunks;
}

class MeteorAligner {
public:
    MeteorAligner(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                  bool use_stem, const SynonymTable* synonyms)
        : n_(cand.size()), m_(ref.size()) {
        // Pair stage = lowest applicable stage for the token pair; -1 when
        // incompatible.
        stage_.assign(n_, std::vector<int>(m_, -1));
        std::vector<std::string> cand_stem(n_), ref_stem(m_);
        if (use_stem) {
            for (size_t i = 0; i < n_; ++i) cand_stem[i] = stem(cand[i]);
            for (size_t j = 0; j < m_; ++j) ref_stem[j] = stem(ref[j]);
        }
        for (size_t i = 0; i < n_; ++i) {
            for (size_t j = 0; j < m_; ++j) {
                if (cand[i] == ref[j])
                    stage_[i][j] = 0;
                else if (use_stem && cand_stem[i] == ref_stem[j])
                    stage_[i][j] = 1;
                else if (synonyms && synonyms->related(cand[i], ref[j]))
                    stage_[i][j] = 2;
            }
        }
        compute_targets();
    }

    // (matches, chunks) of the chunk-minimal alignment realizing the targets.
    std::pair<int, int> align() {
        const int total = targets_[0] + targets_[1] + targets_[2];
        if (total == 0) return {0, 0};

        best_pairs_ = greedy_witness();
        best_chunks_ = chunk_count(best_pairs_);

        used_ref_.assign(m_, false);
        counts_[0] = counts_[1] = counts_[2] = 0;
        nodes_ = 0;
        dfs(0, 0, -2, -2);
        return {total, best_chunks_};
    }

    const std::array<int, 3>& targets() const { return targets_; }

private:
    static constexpr long kNodeBudget = 4'000'000;

    void compute_targets() {
        matched_c_.assign(n_, -1);
        matched_r_.assign(m_, -1);
        targets_ = {0, 0, 0};
        // Stage 0 and 1: greedy left-to-right within equivalence classes.
        for (int s = 0; s <= 1; ++s) {
            for (size_t i = 0; i < n_; ++i) {
                if (matched_c_[i] >= 0) continue;
                for (size_t j = 0; j < m_; ++j) {
                    if (matched_r_[j] >= 0 || stage_[i][j] != s) continue;
                    matched_c_[i] = s;
                    matched_r_[j] = s;
                    ++targets_[s];
                    break;
                }
            }
        }
        // Stage 2: augmenting-path maximum matching over the leftovers.
        std::vector<int> ref_of(n_, -1), cand_of(m_, -1);
        for (size_t i = 0; i < n_; ++i) {
            if (matched_c_[i] >= 0) continue;
            std::vector<char> visited(m_, 0);
            if (augment(static_cast<int>(i), visited, ref_of, cand_of)) ++targets_[2];
        }
    }

    bool augment(int i, std::vector<char>& visited, std::vector<int>& ref_of,
                 std::vector<int>& cand_of) {
        for (size_t j = 0; j < m_; ++j) {
            if (matched_r_[j] >= 0 || stage_[i][j] != 2 || visited[j]) continue;
            visited[j] = 1;
            if (cand_of[j] < 0 || augment(cand_of[j], visited, ref_of, cand_of)) {
                ref_of[i] = static_cast<int>(j);
                cand_of[j] = i;
                return true;
            }
        }
        return false;
    }

    // One alignment realizing the targets: the greedy stage pass plus the
    // stage-2 matching. Seeds the branch-and-bound upper bound.
    std::vector<MeteorPair> greedy_witness() {
        std::vector<MeteorPair> pairs;
        std::vector<char> ref_used(m_, false);
        std::array<int, 3> left = {targets_[0], targets_[1], targets_[2]};
        for (int s = 0; s <= 2; ++s) {
            for (size_t i = 0; i < n_ && left[s] > 0; ++i) {
                bool cand_used = false;
                for (const auto& p : pairs) cand_used |= (p.cand == static_cast<int>(i));
                if (cand_used) continue;
                for (size_t j = 0; j < m_; ++j) {
                    if (ref_used[j] || stage_[i][j] != s) continue;
                    pairs.push_back({static_cast<int>(i), static_cast<int>(j), s});
                    ref_used[j] = true;
                    --left[s];
                    break;
                }
            }
        }
        return pairs;
    }

    void dfs(size_t i, int chunks, int last_cand, int last_ref) {
        if (chunks >= best_chunks_) return;
        if (++nodes_ > kNodeBudget) return;

        const int matched = counts_[0] + counts_[1] + counts_[2];
        const int total = targets_[0] + targets_[1] + targets_[2];
        if (total - matched > static_cast<int>(n_ - i)) return;  // cannot reach targets

        if (i == n_) {
            if (counts_[0] == targets_[0] && counts_[1] == targets_[1] &&
                counts_[2] == targets_[2] && chunks < best_chunks_)
                best_chunks_ = chunks;
            return;
        }

        // Prefer the chunk-continuing reference position so a tight bound is
        // found early.
        const int prefer =
            (last_cand == static_cast<int>(i) - 1 && last_ref + 1 < static_cast<int>(m_))
                ? last_ref + 1
                : -1;
        auto try_match = [&](int j) {
            const int s = stage_[i][j];
            if (s < 0 || used_ref_[j] || counts_[s] >= targets_[s]) return;
            used_ref_[j] = true;
            ++counts_[s];
            const bool continues = (last_cand == static_cast<int>(i) - 1 && j == last_ref + 1);
            dfs(i + 1, chunks + (continues ? 0 : 1), static_cast<int>(i), j);
            --counts_[s];
            used_ref_[j] = false;
        };
        if (prefer >= 0) try_match(prefer);
        for (int j = 0; j < static_cast<int>(m_); ++j)
            if (j != prefer) try_match(j);
        dfs(i + 1, chunks, last_cand, last_ref);  // leave token i unmatched
    }

    size_t n_, m_;
    std::vector<std::vector<int>> stage_;
    std::array<int, 3> targets_{};
    std::vector<int> matched_c_, matched_r_;

    std::vector<MeteorPair> best_pairs_;
    int best_chunks_ = 0;
    std::vector<char> used_ref_;
    std::array<int, 3> counts_{};
    long nodes_ = 0;
};

}  // namespace

double meteor(const TokenSeq& candidate, const TokenSeq& reference, const MetricConfig& cfg,
              const SynonymTable* synonyms) {
    if (candidate.empty() || reference.empty()) return 0.0;

    SynonymTable from_file;
    if (synonyms == nullptr && !cfg.meteor_synonym_table.empty()) {
        from_file = SynonymTable::load(cfg.meteor_synonym_table);
        synonyms = &from_file;
    }
    if (synonyms && synonyms->empty()) synonyms = nullptr;

    MeteorAligner aligner(candidate.tokens, reference.tokens, cfg.meteor_stemming, synonyms);
    const auto [matches, chunks] = aligner.align();
    if (matches == 0) return 0.0;

    const double m = matches;
    const double p = m / static_cast<double>(candidate.size());
    const double r = m / static_cast<double>(reference.size());
    const double f_mean = p * r / (cfg.meteor_alpha * p + (1.0 - cfg.meteor_alpha) * r);
    const double penalty =
        cfg.meteor_gamma * std::pow(static_cast<double>(chunks) / m, cfg.meteor_beta);
    return std::clamp(f_mean * (1.0 - penalty), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// BERTScore

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double idf_of(const std::unordered_map<std::string, double>& idf, const std::string& token) {
    auto it = idf.find(token);
    if (it != idf.end()) return it->second;
    auto dflt = idf.find("");
    return dflt != idf.end() ? dflt->second : 1.0;
}

}  // namespace

std::unordered_map<std::string, double> idf_weights(const std::vector<std::string>& documents) {
    std::unordered_map<std::string, double> df;
    for (const auto& doc : documents) {
        std::unordered_map<std::string, bool> seen;
        for (const auto& tok : tokenize(doc).tokens) {
            if (!seen[tok]) {
                seen[tok] = true;
                df[tok] += 1.0;
            }
        }
    }
    const double n = static_cast<double>(documents.size());
    std::unordered_map<std::string, double> idf;
    for (const auto& [tok, count] : df) idf[tok] = std::log((n + 1.0) / (count + 1.0));
    idf[""] = std::log(n + 1.0);  // default for unseen tokens
    return idf;
}

PRF bert_score(const std::string& candidate, const std::string& reference, Embedder& embedder,
               const MetricConfig& cfg, const std::unordered_map<std::string, double>* idf) {
    const TokenSeq cand = tokenize(candidate);
    const TokenSeq ref = tokenize(reference);
    if (cand.empty() || ref.empty())
        throw EmptyInputError("bert_score() requires non-empty texts after tokenization");

    std::vector<std::string> all = cand.tokens;
    all.insert(all.end(), ref.tokens.begin(), ref.tokens.end());
    const EmbeddingMatrix emb = embedder.embed(all);
    if (emb.rows.size() != all.size())
        throw DimensionMismatchError("embedding provider returned wrong row count");

    const size_t nc = cand.size();
    const size_t nr = ref.size();
    const bool weighted = cfg.bertscore_idf && idf != nullptr;

    std::vector<std::vector<double>> sim(nc, std::vector<double>(nr, 0.0));
    for (size_t i = 0; i < nc; ++i)
        for (size_t j = 0; j < nr; ++j) sim[i][j] = cosine(emb.rows[i], emb.rows[nc + j]);

    double p_num = 0.0, p_den = 0.0;
    for (size_t i = 0; i < nc; ++i) {
        double best = sim[i][0];
        for (size_t j = 1; j < nr; ++j) best = std::max(best, sim[i][j]);
        const double w = weighted ? idf_of(*idf, cand.tokens[i]) : 1.0;
        p_num += w * best;
        p_den += w;
    }
    double r_num = 0.0, r_den = 0.0;
    for (size_t j = 0; j < nr; ++j) {
        double best = sim[0][j];
        for (size_t i = 1; i < nc; ++i) best = std::max(best, sim[i][j]);
        const double w = weighted ? idf_of(*idf, ref.tokens[j]) : 1.0;
        r_num += w * best;
        r_den += w;
    }

    PRF out;
    out.p = p_den > 0.0 ? p_num / p_den : 0.0;
    out.r = r_den > 0.0 ? r_num / r_den : 0.0;
    out.f = (out.p + out.r) > 0.0 ? 2.0 * out.p * out.r / (out.p + out.r) : 0.0;

    if (cfg.bertscore_rescale) {
        const double b = cfg.bertscore_rescale_baseline;
        if (b < 1.0) {
            out.p = (out.p - b) / (1.0 - b);
            out.r = (out.r - b) / (1.0 - b);
            out.f = (out.f - b) / (1.0 - b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-record scoring

ScoreCard score_record(const GenerationRecord& rec, const CodeExample& ex, Embedder& embedder,
                       const MetricConfig& cfg, const SynonymTable* synonyms,
                       const std::unordered_map<std::string, double>* idf) {
    if (rec.example_id != ex.id)
        throw std::invalid_argument("score_record: record example_id \"" + rec.example_id +
                                    "\" does not match example \"" + ex.id + "\"");

    ScoreCard card;
    card.example_id = rec.example_id;
    card.model_id = rec.model_id;

    const TokenSeq cand = tokenize(rec.final_output);
    const TokenSeq ref = tokenize(ex.reference);
    if (cand.empty()) {
        card.bert = PRF{};  // all zeros; empty output scores nothing
        return card;
    }

    card.bleu = bleu(cand, {ref}, cfg);
    card.rouge_l = rouge_l(cand, ref, cfg.rouge_beta);
    card.meteor = meteor(cand, ref, cfg, synonyms);
    try {
        card.bert = bert_score(rec.final_output, ex.reference, embedder, cfg, idf);
    } catch (const std::exception&) {
        card.bert = std::nullopt;  // provider failure: field absent, record kept
    }
    return card;
}

}  // namespace nldeval
