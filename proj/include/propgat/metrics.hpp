#pragma once

#include <string>
#include <vector>

namespace propgat {

// Labels are 0/1 with 1 = fake (the positive class throughout).
struct EvalResult {
    double f1_macro = 0.0;
    double roc_auc = 0.0;
    double auc_pr = 0.0;
    int n_pos = 0;
    int n_neg = 0;
    double threshold = 0.5;
};

// Unweighted mean of the per-class F1 scores; a class with an empty
// precision/recall denominator contributes 0.
double f1_macro(const std::vector<int>& labels, const std::vector<double>& probs,
                double threshold = 0.5);

// Mann-Whitney rank form with midranks for ties. Throws if only one class is
// present.
double roc_auc(const std::vector<int>& labels, const std::vector<double>& scores);

// Average precision with step interpolation over descending unique score
// thresholds; tied scores are processed as one group. Throws without
// positives.
double auc_pr(const std::vector<int>& labels, const std::vector<double>& scores);

EvalResult evaluate(const std::vector<int>& labels, const std::vector<double>& probs,
                    double threshold = 0.5);

// Per-metric mean and sample standard deviation over folds, in percent.
struct FoldAggregate {
    int k = 0;
    double f1_mean = 0.0, f1_std = 0.0;
    double roc_mean = 0.0, roc_std = 0.0;
    double pr_mean = 0.0, pr_std = 0.0;

    std::string f1_cell() const;   // "68.7 ± 1.0"
    std::string roc_cell() const;
    std::string pr_cell() const;
};

FoldAggregate aggregate_folds(const std::vector<EvalResult>& per_fold);

}  // namespace propgat
