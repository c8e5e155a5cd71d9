#include "nldeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "nldeval/errors.hpp"

namespace nldeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string>& metric_order() {
    static const std::vector<std::string> order = {"bleu", "rouge_l_f", "meteor", "bert_f"};
    return order;
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// Full-precision but deterministic float rendering for machine CSVs.
std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double metric_of(const ModelSummary& s, const std::string& name) {
    if (name == "bleu") return s.mean_bleu;
    if (name == "rouge_l_f") return s.mean_rouge_l_f;
    if (name == "meteor") return s.mean_meteor;
    return s.mean_bert_f;
}

}  // namespace

std::vector<ModelSummary> aggregate(const std::vector<ScoreCard>& cards) {
    if (cards.empty()) throw EmptyInputError("aggregate: no score cards");

    std::vector<std::string> order;
    struct Acc {
        double bleu = 0, rouge = 0, meteor = 0, bert = 0;
        size_t n = 0, n_bert = 0;
    };
    std::map<std::string, Acc> by_model;
    for (const auto& card : cards) {
        if (!by_model.count(card.model_id)) order.push_back(card.model_id);
        Acc& acc = by_model[card.model_id];
        acc.bleu += card.bleu;
        acc.rouge += card.rouge_l.f;
        acc.meteor += card.meteor;
        acc.n += 1;
        if (card.bert) {
            acc.bert += card.bert->f;
            acc.n_bert += 1;
        }
    }

    std::vector<ModelSummary> summaries;
    for (const auto& model : order) {
        const Acc& acc = by_model[model];
        ModelSummary s;
        s.model_id = model;
        s.record_count = acc.n;
        s.bert_count = acc.n_bert;
        s.mean_bleu = acc.bleu / static_cast<double>(acc.n);
        s.mean_rouge_l_f = acc.rouge / static_cast<double>(acc.n);
        s.mean_meteor = acc.meteor / static_cast<double>(acc.n);
        s.mean_bert_f = acc.n_bert > 0 ? acc.bert / static_cast<double>(acc.n_bert) : 0.0;
        summaries.push_back(s);
    }
    return summaries;
}

ComparisonTable comparison_table(const std::vector<ModelSummary>& summaries,
                                 std::optional<std::string> sort_by_metric, bool descending) {
    if (summaries.empty()) throw EmptyInputError("comparison_table: no summaries");
    std::vector<ModelSummary> rows = summaries;
    if (sort_by_metric) {
        std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
            const double va = metric_of(a, *sort_by_metric);
            const double vb = metric_of(b, *sort_by_metric);
            return descending ? va > vb : va < vb;
        });
    }

    size_t name_w = 5;  // "Model"
    for (const auto& r : rows) name_w = std::max(name_w, r.model_id.size());

    std::ostringstream text;
    text << std::left << std::setw(static_cast<int>(name_w + 2)) << "Model" << std::right
         << std::setw(8) << "BLEU" << std::setw(13) << "ROUGE-L (F)" << std::setw(8) << "METEOR"
         << std::setw(11) << "BERTScore" << '\n';
    std::ostringstream csv;
    csv << "model,bleu,rouge_l_f,meteor,bert_f\n";
    for (const auto& r : rows) {
        text << std::left << std::setw(static_cast<int>(name_w + 2)) << r.model_id << std::right
             << std::setw(8) << fmt4(r.mean_bleu) << std::setw(13) << fmt4(r.mean_rouge_l_f)
             << std::setw(8) << fmt4(r.mean_meteor) << std::setw(11) << fmt4(r.mean_bert_f)
             << '\n';
        csv << r.model_id << ',' << fmt4(r.mean_bleu) << ',' << fmt4(r.mean_rouge_l_f) << ','
            << fmt4(r.mean_meteor) << ',' << fmt4(r.mean_bert_f) << '\n';
    }
    return {text.str(), csv.str()};
}

CorrelationMatrix metric_correlations(const std::vector<ScoreCard>& cards) {
    std::vector<std::vector<double>> cols(4);
    for (const auto& card : cards) {
        if (!card.bert) continue;  // correlations use complete cards only
        cols[0].push_back(card.bleu);
        cols[1].push_back(card.rouge_l.f);
        cols[2].push_back(card.meteor);
        cols[3].push_back(card.bert->f);
    }
    const size_t n = cols[0].size();
    if (n < 2) throw InsufficientDataError("metric_correlations: need >= 2 complete cards");

    auto mean = [&](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    std::vector<double> mu(4), sd(4);
    for (int k = 0; k < 4; ++k) {
        mu[k] = mean(cols[k]);
        double var = 0;
        for (double x : cols[k]) var += (x - mu[k]) * (x - mu[k]);
        sd[k] = std::sqrt(var);
    }

    CorrelationMatrix matrix;
    matrix.metric_names = metric_order();
    matrix.values.assign(4, std::vector<double>(4, 0.0));
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            if (a == b) {
                matrix.values[a][b] = 1.0;
                continue;
            }
            if (sd[a] == 0.0 || sd[b] == 0.0) {
                matrix.values[a][b] = 0.0;  // zero-variance convention
                continue;
            }
            double cov = 0;
            for (size_t i = 0; i < n; ++i) cov += (cols[a][i] - mu[a]) * (cols[b][i] - mu[b]);
            matrix.values[a][b] = cov / (sd[a] * sd[b]);
        }
    }
    return matrix;
}

std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>>
stacked_contributions(const std::vector<ModelSummary>& summaries) {
    if (summaries.empty()) throw EmptyInputError("stacked_contributions: no summaries");
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> out;
    for (const auto& s : summaries) {
        std::vector<std::pair<std::string, double>> stack;
        for (const auto& metric : metric_order()) stack.emplace_back(metric, metric_of(s, metric));
        out.emplace_back(s.model_id, std::move(stack));
    }
    return out;
}

EvaluationReport build_report(const std::string& run_id, const std::vector<ScoreCard>& cards,
                              const std::vector<std::pair<std::string, double>>& mauve_by_model) {
    EvaluationReport report;
    report.run_id = run_id;
    report.summaries = aggregate(cards);
    for (auto& s : report.summaries)
        for (const auto& [model, score] : mauve_by_model)
            if (model == s.model_id) s.mauve = score;
    try {
        report.correlations = metric_correlations(cards);
    } catch (const InsufficientDataError&) {
        report.correlations.metric_names = metric_order();
        report.correlations.values.assign(4, std::vector<double>(4, 0.0));
        for (int k = 0; k < 4; ++k) report.correlations.values[k][k] = 1.0;
    }
    report.stacked = stacked_contributions(report.summaries);

    report.heatmap_metrics = metric_order();
    for (const auto& s : report.summaries) {
        report.heatmap_models.push_back(s.model_id);
        std::vector<double> row;
        for (const auto& metric : metric_order()) row.push_back(metric_of(s, metric));
        report.heatmap.push_back(std::move(row));
    }
    for (size_t m = 0; m < report.heatmap_metrics.size(); ++m) {
        size_t min_row = 0, max_row = 0;
        for (size_t r = 1; r < report.heatmap.size(); ++r) {
            if (report.heatmap[r][m] < report.heatmap[min_row][m]) min_row = r;
            if (report.heatmap[r][m] > report.heatmap[max_row][m]) max_row = r;
        }
        report.heatmap_min_row.push_back(min_row);
        report.heatmap_max_row.push_back(max_row);
    }
    return report;
}

std::string scores_to_csv(const std::vector<ScoreCard>& cards) {
    std::ostringstream csv;
    csv << "example_id,model_id,bleu,rouge_l_p,rouge_l_r,rouge_l_f,meteor,bert_p,bert_r,bert_f\n";
    for (const auto& c : cards) {
        csv << c.example_id << ',' << c.model_id << ',' << fmt_full(c.bleu) << ','
            << fmt_full(c.rouge_l.p) << ',' << fmt_full(c.rouge_l.r) << ','
            << fmt_full(c.rouge_l.f) << ',' << fmt_full(c.meteor) << ',';
        if (c.bert)
            csv << fmt_full(c.bert->p) << ',' << fmt_full(c.bert->r) << ',' << fmt_full(c.bert->f);
        else
            csv << ",,";
        csv << '\n';
    }
    return csv.str();
}

std::vector<ScoreCard> scores_from_csv(const std::string& csv) {
    std::vector<ScoreCard> cards;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 10) fields.push_back("");
        ScoreCard card;
        card.example_id = fields[0];
        card.model_id = fields[1];
        card.bleu = std::stod(fields[2]);
        card.rouge_l = {std::stod(fields[3]), std::stod(fields[4]), std::stod(fields[5])};
        card.meteor = std::stod(fields[6]);
        if (!fields[7].empty())
            card.bert = PRF{std::stod(fields[7]), std::stod(fields[8]), std::stod(fields[9])};
        cards.push_back(std::move(card));
    }
    return cards;
}

std::vector<std::string> export_report(const EvaluationReport& report,
                                       const std::vector<ScoreCard>& cards,
                                       const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto write_file = [&](const std::string& name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        if (!out) throw IoError("write failed: " + path.string());
        written.push_back(path.string());
    };

    // summary.csv
    {
        std::ostringstream csv;
        csv << "model,bleu,rouge_l_f,meteor,bert_f,record_count,bert_count,mauve\n";
        for (const auto& s : report.summaries) {
            csv << s.model_id << ',' << fmt_full(s.mean_bleu) << ',' << fmt_full(s.mean_rouge_l_f)
                << ',' << fmt_full(s.mean_meteor) << ',' << fmt_full(s.mean_bert_f) << ','
                << s.record_count << ',' << s.bert_count << ','
                << (s.mauve ? fmt_full(*s.mauve) : "") << '\n';
        }
        write_file("summary.csv", csv.str());
    }

    write_file("scores.csv", scores_to_csv(cards));

    {
        std::ostringstream csv;
        csv << "metric";
        for (const auto& name : report.correlations.metric_names) csv << ',' << name;
        csv << '\n';
        for (size_t a = 0; a < report.correlations.metric_names.size(); ++a) {
            csv << report.correlations.metric_names[a];
            for (size_t b = 0; b < report.correlations.metric_names.size(); ++b)
                csv << ',' << fmt_full(report.correlations.values[a][b]);
            csv << '\n';
        }
        write_file("correlations.csv", csv.str());
    }

    {
        std::ostringstream csv;
        csv << "model,metric,value\n";
        for (const auto& [model, stack] : report.stacked)
            for (const auto& [metric, value] : stack)
                csv << model << ',' << metric << ',' << fmt_full(value) << '\n';
        write_file("stacked.csv", csv.str());
    }

    {
        std::ostringstream csv;
        csv << "model";
        for (const auto& metric : report.heatmap_metrics) csv << ',' << metric;
        csv << '\n';
        for (size_t r = 0; r < report.heatmap_models.size(); ++r) {
            csv << report.heatmap_models[r];
            for (size_t m = 0; m < report.heatmap_metrics.size(); ++m) {
                csv << ',' << fmt_full(report.heatmap[r][m]);
                if (report.heatmap_min_row[m] == r) csv << " (min)";
                if (report.heatmap_max_row[m] == r) csv << " (max)";
            }
            csv << '\n';
        }
        write_file("heatmap.csv", csv.str());
    }

    {
        json j;
        j["run_id"] = report.run_id;
        j["summaries"] = json::array();
        for (const auto& s : report.summaries) {
            json js = {{"model_id", s.model_id},
                       {"mean_bleu", s.mean_bleu},
                       {"mean_rouge_l_f", s.mean_rouge_l_f},
                       {"mean_meteor", s.mean_meteor},
                       {"mean_bert_f", s.mean_bert_f},
                       {"record_count", s.record_count},
                       {"bert_count", s.bert_count}};
            if (s.mauve) js["mauve"] = *s.mauve;
            j["summaries"].push_back(js);
        }
        j["correlations"] = {{"metric_names", report.correlations.metric_names},
                             {"values", report.correlations.values}};
        j["stacked"] = json::array();
        for (const auto& [model, stack] : report.stacked) {
            json entry = {{"model_id", model}, {"metrics", json::array()}};
            for (const auto& [metric, value] : stack)
                entry["metrics"].push_back({{"metric", metric}, {"value", value}});
            j["stacked"].push_back(entry);
        }
        j["heatmap"] = {{"models", report.heatmap_models},
                        {"metrics", report.heatmap_metrics},
                        {"values", report.heatmap},
                        {"min_row", report.heatmap_min_row},
                        {"max_row", report.heatmap_max_row}};
        write_file("report.json", j.dump(2) + "\n");
    }

    return written;
}

}  // namespace nldeval
