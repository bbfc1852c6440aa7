#include "propgat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace propgat {

std::vector<double> differences_after_zero_removal(const PairedSample& sample) {
    if (sample.a.size() != sample.b.size()) {
        throw std::invalid_argument("paired sample length mismatch");
    }
    std::vector<double> d;
    for (std::size_t i = 0; i < sample.a.size(); ++i) {
        double diff = sample.a[i] - sample.b[i];
        if (diff != 0.0) d.push_back(diff);
    }
    return d;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample) {
    WilcoxonResult res;
    std::vector<double> d = differences_after_zero_removal(sample);
    const int n = static_cast<int>(d.size());
    res.n_used = n;
    if (n == 0) {
        res.degenerate = true;
        res.p = 1.0;
        return res;
    }

    // Midranks of |d|.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return std::fabs(d[a]) < std::fabs(d[b]); });
    std::vector<double> rank(n);
    std::vector<int> tie_sizes;
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && std::fabs(d[idx[j + 1]]) == std::fabs(d[idx[i]])) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (int k = i; k <= j; ++k) rank[idx[k]] = avg;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }

    for (int k = 0; k < n; ++k) {
        if (d[k] > 0.0) res.w_plus += rank[k];
        else res.w_minus += rank[k];
    }
    const double w_obs = std::min(res.w_plus, res.w_minus);
    const double total = res.w_plus + res.w_minus;

    if (n <= 20) {
        res.exact = true;
        // Count sign assignments whose min(W+, W-) is at least as extreme.
        const std::uint64_t count_all = std::uint64_t{1} << n;
        std::uint64_t hits = 0;
        for (std::uint64_t mask = 0; mask < count_all; ++mask) {
            double w_pos = 0.0;
            for (int k = 0; k < n; ++k) {
                if (mask & (std::uint64_t{1} << k)) w_pos += rank[k];
            }
            if (std::min(w_pos, total - w_pos) <= w_obs) ++hits;
        }
        res.p = static_cast<double>(hits) / static_cast<double>(count_all);
    } else {
        const double nn = static_cast<double>(n);
        const double mu = nn * (nn + 1.0) / 4.0;
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
        for (int t : tie_sizes) {
            var -= (static_cast<double>(t) * t * t - t) / 48.0;
        }
        if (var <= 0.0) {
            res.degenerate = true;
            res.p = 1.0;
            return res;
        }
        double z = (w_obs - mu + 0.5) / std::sqrt(var);
        res.p = std::clamp(2.0 * normal_cdf(z), 0.0, 1.0);
    }
    return res;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
    const std::size_t m = p.size();
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("p-value outside [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double scaled = std::min(1.0, static_cast<double>(m - k) * p[order[k]]);
        running = std::max(running, scaled);
        adjusted[order[k]] = running;
    }
    return adjusted;
}

PValueTable pairwise_table(const std::vector<GroupedFoldValues>& groups, const std::string& axis,
                           const std::string& metric) {
    PValueTable table;
    table.axis = axis;
    table.metric = metric;

    // axis value -> pairing key -> fold values, preserving first-seen axis order
    std::vector<std::string> values;
    std::map<std::string, std::map<std::string, const std::vector<double>*>> by_value;
    for (const auto& g : groups) {
        if (!by_value.count(g.axis_value)) values.push_back(g.axis_value);
        auto& slot = by_value[g.axis_value][g.pairing_key];
        if (slot != nullptr) {
            throw std::invalid_argument("duplicate group for axis value '" + g.axis_value +
                                        "' and key '" + g.pairing_key + "'");
        }
        slot = &g.folds;
    }

    std::vector<double> raw;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            PairedSample sample;
            const auto& left = by_value[values[i]];
            const auto& right = by_value[values[j]];
            for (const auto& [key, folds_a] : left) {
                auto it = right.find(key);
                if (it == right.end()) continue;
                if (folds_a->size() != it->second->size()) {
                    throw std::runtime_error("misaligned folds for pairing key '" + key + "'");
                }
                sample.a.insert(sample.a.end(), folds_a->begin(), folds_a->end());
                sample.b.insert(sample.b.end(), it->second->begin(), it->second->end());
            }
            WilcoxonResult w = wilcoxon_signed_rank(sample);
            PairwiseComparison cmp;
            cmp.label = values[i] + " vs " + values[j];
            cmp.p_raw = w.p;
            cmp.degenerate = w.degenerate;
            cmp.n_pairs = static_cast<int>(sample.a.size());
            table.comparisons.push_back(cmp);
            raw.push_back(w.p);
        }
    }

    std::vector<double> adjusted = holm_adjust(raw);
    for (std::size_t k = 0; k < adjusted.size(); ++k) {
        table.comparisons[k].p_holm = adjusted[k];
        table.comparisons[k].significant = adjusted[k] < 0.05;
    }
    return table;
}

}  // namespace propgat
