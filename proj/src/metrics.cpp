#include "propgat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "propgat/io_util.hpp"

namespace propgat {

double f1_macro(const std::vector<int>& labels, const std::vector<double>& probs,
                double threshold) {
    if (labels.empty() || labels.size() != probs.size()) {
        throw std::invalid_argument("f1_macro: empty or mismatched inputs");
    }
    // Confusion counts with 1 = fake as positive.
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool pred = probs[i] >= threshold;
        bool truth = labels[i] == 1;
        if (pred && truth) ++tp;
        else if (pred && !truth) ++fp;
        else if (!pred && truth) ++fn;
        else ++tn;
    }
    auto class_f1 = [](long tp_c, long fp_c, long fn_c) {
        double prec = (tp_c + fp_c) > 0 ? static_cast<double>(tp_c) / (tp_c + fp_c) : 0.0;
        double rec = (tp_c + fn_c) > 0 ? static_cast<double>(tp_c) / (tp_c + fn_c) : 0.0;
        return (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    };
    // For the negative class the roles of fp/fn swap.
    double f1_pos = class_f1(tp, fp, fn);
    double f1_neg = class_f1(tn, fn, fp);
    return 0.5 * (f1_pos + f1_neg);
}

namespace {

// Midranks (1-based) of the scores; tied values share the average rank.
std::vector<double> midranks(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of ranks i+1 .. j+1
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double roc_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size() || labels.empty()) {
        throw std::invalid_argument("roc_auc: empty or mismatched inputs");
    }
    long n_pos = std::count(labels.begin(), labels.end(), 1);
    long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::runtime_error("roc_auc undefined: only one class present");
    }
    std::vector<double> rank = midranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) rank_sum_pos += rank[i];
    }
    double numer = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return numer / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_pr(const std::vector<int>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size() || labels.empty()) {
        throw std::invalid_argument("auc_pr: empty or mismatched inputs");
    }
    long n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0) throw std::runtime_error("auc_pr undefined: no positive examples");

    std::vector<std::size_t> idx(labels.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[idx[k]] == 1) ++tp;
            else ++fp;
        }
        double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return ap;
}

EvalResult evaluate(const std::vector<int>& labels, const std::vector<double>& probs,
                    double threshold) {
    EvalResult r;
    r.threshold = threshold;
    r.n_pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    r.n_neg = static_cast<int>(labels.size()) - r.n_pos;
    r.f1_macro = f1_macro(labels, probs, threshold);
    r.roc_auc = roc_auc(labels, probs);
    r.auc_pr = auc_pr(labels, probs);
    return r;
}

namespace {

std::pair<double, double> mean_sample_std(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

FoldAggregate aggregate_folds(const std::vector<EvalResult>& per_fold) {
    if (per_fold.size() < 2) {
        throw std::invalid_argument("aggregate_folds requires at least 2 folds");
    }
    std::vector<double> f1, roc, pr;
    for (const auto& r : per_fold) {
        f1.push_back(r.f1_macro * 100.0);
        roc.push_back(r.roc_auc * 100.0);
        pr.push_back(r.auc_pr * 100.0);
    }
    FoldAggregate a;
    a.k = static_cast<int>(per_fold.size());
    std::tie(a.f1_mean, a.f1_std) = mean_sample_std(f1);
    std::tie(a.roc_mean, a.roc_std) = mean_sample_std(roc);
    std::tie(a.pr_mean, a.pr_std) = mean_sample_std(pr);
    return a;
}

std::string FoldAggregate::f1_cell() const { return fmt_mean_std(f1_mean, f1_std); }
std::string FoldAggregate::roc_cell() const { return fmt_mean_std(roc_mean, roc_std); }
std::string FoldAggregate::pr_cell() const { return fmt_mean_std(pr_mean, pr_std); }

}  // namespace propgat
