#include <algorithm>
#include <iostream>
#include <map>

#include "propgat/harness.hpp"
#include "propgat/io_util.hpp"

namespace propgat {

ReportSummary summarize_results(const std::vector<ResultRow>& rows) {
    ReportSummary s;
    if (rows.empty()) return s;
    s.has_rows = true;

    const ResultRow* best = nullptr;
    const ResultRow* no_text = nullptr;
    const ResultRow* best_static = nullptr;
    const ResultRow* best_contextual = nullptr;
    for (const auto& r : rows) {
        if (!best || r.aggregate.f1_mean > best->aggregate.f1_mean) best = &r;
        if (!r.config.text.uses_text()) {
            if (!no_text || r.aggregate.f1_mean > no_text->aggregate.f1_mean) no_text = &r;
        } else if (r.config.text.encoder == Encoder::static_) {
            if (!best_static || r.aggregate.f1_mean > best_static->aggregate.f1_mean) {
                best_static = &r;
            }
        } else {
            if (!best_contextual || r.aggregate.f1_mean > best_contextual->aggregate.f1_mean) {
                best_contextual = &r;
            }
        }
    }

    s.best_config = config_label(best->config);
    s.best_f1 = best->aggregate.f1_mean;
    if (no_text && no_text->aggregate.f1_mean > 0.0) {
        s.has_no_text = true;
        s.no_text_f1 = no_text->aggregate.f1_mean;
        s.gain_vs_no_text_pct = 100.0 * (s.best_f1 / s.no_text_f1 - 1.0);
    }
    if (best_static && best_contextual && best_static->aggregate.f1_mean > 0.0) {
        s.has_both_encoders = true;
        s.best_static_f1 = best_static->aggregate.f1_mean;
        s.best_contextual_f1 = best_contextual->aggregate.f1_mean;
        s.gain_contextual_vs_static_pct =
            100.0 * (s.best_contextual_f1 / s.best_static_f1 - 1.0);
    }
    return s;
}

std::string ReportSummary::text() const {
    if (!has_rows) return "no result rows\n";
    std::string out;
    out += "best config: " + best_config + "\n";
    out += "best F1 Macro: " + fmt_percent1(best_f1) + "\n";
    if (has_no_text) {
        out += "no-text baseline F1 Macro: " + fmt_percent1(no_text_f1) + "\n";
        out += "relative F1 gain of best config vs no-text: " +
               fmt_percent1(gain_vs_no_text_pct) + "%\n";
    }
    if (has_both_encoders) {
        out += "best static-encoder F1 Macro: " + fmt_percent1(best_static_f1) + "\n";
        out += "best contextual-encoder F1 Macro: " + fmt_percent1(best_contextual_f1) + "\n";
        out += "relative F1 gain of contextual vs static: " +
               fmt_percent1(gain_contextual_vs_static_pct) + "%\n";
    }
    return out;
}

namespace {

// Long-format per-axis aggregation backing the metric figures: for every
// (metric, axis, axis value) the mean of per-config fold-means and the mean
// of per-config fold-stds over the matching rows.
std::string figure_data_csv(const std::vector<ResultRow>& rows) {
    std::string out = "metric,axis,value,mean,std\n";
    const char* metrics[] = {"f1_macro", "roc_auc", "auc_pr"};
    const char* axes[] = {"encoder", "profiles", "retweets", "alpha"};
    for (const char* metric : metrics) {
        for (const char* axis : axes) {
            std::vector<std::string> order;
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> buckets;
            for (const auto& r : rows) {
                std::string value;
                if (std::string(axis) == "encoder") value = to_string(r.config.text.encoder);
                else if (std::string(axis) == "profiles") value = r.config.profiles_cell();
                else if (std::string(axis) == "retweets") value = r.config.retweets_cell();
                else value = fmt_double(r.config.alpha, "%g");
                double mean, std;
                if (std::string(metric) == "f1_macro") {
                    mean = r.aggregate.f1_mean;
                    std = r.aggregate.f1_std;
                } else if (std::string(metric) == "roc_auc") {
                    mean = r.aggregate.roc_mean;
                    std = r.aggregate.roc_std;
                } else {
                    mean = r.aggregate.pr_mean;
                    std = r.aggregate.pr_std;
                }
                if (!buckets.count(value)) order.push_back(value);
                buckets[value].first.push_back(mean);
                buckets[value].second.push_back(std);
            }
            for (const auto& value : order) {
                const auto& [means, stds] = buckets[value];
                double m = 0.0, sd = 0.0;
                for (double v : means) m += v;
                for (double v : stds) sd += v;
                m /= static_cast<double>(means.size());
                sd /= static_cast<double>(stds.size());
                out += std::string(metric) + "," + axis + "," + value + "," +
                       fmt_double(m, "%.6f") + "," + fmt_double(sd, "%.6f") + "\n";
            }
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> write_report(const std::vector<ResultRow>& rows,
                                      const std::vector<PValueTable>& tables,
                                      const std::string& out_dir) {
    if (rows.empty()) throw std::invalid_argument("report requires at least one result row");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;

    std::string results_path = out_dir + "/results.csv";
    write_results_csv(rows, results_path);
    written.push_back(results_path);

    if (tables.empty()) {
        std::cerr << "warning: no p-value tables supplied; skipping pvalues.csv\n";
    } else {
        std::string pvalues_path = out_dir + "/pvalues.csv";
        write_pvalue_csv(tables, pvalues_path);
        written.push_back(pvalues_path);
    }

    std::string figure_path = out_dir + "/figure_data.csv";
    write_file(figure_path, figure_data_csv(rows));
    written.push_back(figure_path);

    std::string summary_path = out_dir + "/summary.txt";
    write_file(summary_path, summarize_results(rows).text());
    written.push_back(summary_path);
    return written;
}

}  // namespace propgat
