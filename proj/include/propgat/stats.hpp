#pragma once

#include <string>
#include <vector>

namespace propgat {

// Per-fold metric values of two models, index-aligned by fold.
struct PairedSample {
    std::vector<double> a;
    std::vector<double> b;
};

struct WilcoxonResult {
    double p = 1.0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    int n_used = 0;       // differences remaining after zero removal
    bool exact = false;   // exact enumeration branch (n <= 20)
    bool degenerate = false;  // all differences were zero
};

// Two-sided signed-rank test. Zero differences are discarded; |d| is ranked
// with midranks. W = min(W+, W-). Exact p for n <= 20 enumerates all 2^n
// sign assignments; beyond that a normal approximation with continuity
// correction and tie-corrected variance is used.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample);

// Holm step-down adjustment; output is in the input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

struct PairwiseComparison {
    std::string label;  // e.g. "0 vs 5"
    double p_raw = 1.0;
    double p_holm = 1.0;
    bool significant = false;  // adjusted p < 0.05
    bool degenerate = false;
    int n_pairs = 0;
};

// One metric's pairwise table over the values of a grouping axis.
struct PValueTable {
    std::string metric;
    std::string axis;
    std::vector<PairwiseComparison> comparisons;
};

// Values of one metric for one grid config across folds.
struct GroupedFoldValues {
    std::string axis_value;   // value of the grouping axis, e.g. "10"
    std::string pairing_key;  // remaining config axes; pairs align on (key, fold)
    std::vector<double> folds;
};

// Builds the pairwise table for one metric: one comparison per unordered
// pair of axis values, pooling fold values across all configs that share
// the remaining axes. Axis values keep their first-seen order. Throws if a
// pairing key has misaligned fold counts.
PValueTable pairwise_table(const std::vector<GroupedFoldValues>& groups, const std::string& axis,
                           const std::string& metric);

std::vector<double> differences_after_zero_removal(const PairedSample& sample);

}  // namespace propgat
