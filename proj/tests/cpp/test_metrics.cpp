#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "propgat/metrics.hpp"
#include "propgat/rng.hpp"
#include "test_util.hpp"

using namespace propgat;

namespace {

// O(n_pos * n_neg) pair-counting oracle: wins + half-ties over all pairs.
double roc_auc_pair_oracle(const std::vector<int>& labels, const std::vector<double>& scores) {
    double numer = 0.0;
    long n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            ++n_pos;
            for (std::size_t j = 0; j < labels.size(); ++j) {
                if (labels[j] != 0) continue;
                if (scores[i] > scores[j]) numer += 1.0;
                else if (scores[i] == scores[j]) numer += 0.5;
            }
        } else {
            ++n_neg;
        }
    }
    return numer / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Threshold-sweep oracle: recount TP/FP from scratch at every distinct score.
double auc_pr_sweep_oracle(const std::vector<int>& labels, const std::vector<double>& scores) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    long n_pos = std::count(labels.begin(), labels.end(), 1);
    double ap = 0.0, prev_recall = 0.0;
    for (double thr : thresholds) {
        long tp = 0, fp = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (scores[i] >= thr) {
                if (labels[i] == 1) ++tp;
                else ++fp;
            }
        }
        double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

std::pair<std::vector<int>, std::vector<double>> random_instance(RngStream& rng, bool tied) {
    int n = 2 + static_cast<int>(rng.uniform_int(49));
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    while (true) {
        for (int i = 0; i < n; ++i) labels[i] = rng.bernoulli(0.4) ? 1 : 0;
        int pos = std::count(labels.begin(), labels.end(), 1);
        if (pos > 0 && pos < n) break;
    }
    for (int i = 0; i < n; ++i) {
        scores[i] = tied ? 0.1 * static_cast<double>(rng.uniform_int(10)) : rng.u01();
    }
    return {labels, scores};
}

}  // namespace

TEST_CASE("f1_macro basics") {
    SUBCASE("perfect predictions") {
        CHECK(f1_macro({1, 0, 1, 0}, {0.9, 0.1, 0.8, 0.2}) == doctest::Approx(1.0));
    }

    SUBCASE("all-majority predictions on a 9:1 set") {
        std::vector<int> labels(10, 0);
        labels[0] = 1;
        std::vector<double> probs(10, 0.1);  // everything called 'true'
        double got = f1_macro(labels, probs);
        // hand confusion matrix: true class tp=9 fp=1 fn=0 -> f1 = 18/19; fake f1 = 0
        CHECK(got == doctest::Approx(9.0 / 19.0).epsilon(1e-9));
        CHECK(got == doctest::Approx(0.47368).epsilon(1e-4));
    }

    SUBCASE("fully inverted predictions on a balanced set") {
        CHECK(f1_macro({1, 1, 0, 0}, {0.1, 0.2, 0.9, 0.8}) == doctest::Approx(0.0));
    }

    SUBCASE("class-relabel symmetry") {
        RngStream rng(3, {static_cast<std::uint64_t>(StreamUse::test), 27});
        for (int it = 0; it < 50; ++it) {
            auto [labels, probs] = random_instance(rng, false);
            std::vector<int> flipped;
            std::vector<double> inverted;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                flipped.push_back(1 - labels[i]);
                inverted.push_back(1.0 - probs[i]);
            }
            // probs straddling exactly 0.5 would flip asymmetrically; avoid
            bool boundary = std::any_of(probs.begin(), probs.end(),
                                        [](double p) { return p == 0.5; });
            if (boundary) continue;
            CHECK(f1_macro(labels, probs) ==
                  doctest::Approx(f1_macro(flipped, inverted)).epsilon(1e-12));
        }
    }
}

TEST_CASE("roc_auc rank statistic") {
    SUBCASE("separable and all-tied cases") {
        CHECK(roc_auc({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1}) == doctest::Approx(1.0));
        CHECK(roc_auc({1, 0, 1, 0}, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(0.5));
    }

    SUBCASE("worked example equals 3 wins out of 4 pairs") {
        std::vector<int> labels = {1, 0, 1, 0};
        std::vector<double> scores = {0.9, 0.8, 0.4, 0.2};
        CHECK(roc_auc(labels, scores) == doctest::Approx(0.75));
        CHECK(roc_auc(labels, scores) == roc_auc_pair_oracle(labels, scores));
    }

    SUBCASE("single class is an error") {
        CHECK_THROWS_AS(roc_auc({1, 1}, {0.5, 0.6}), std::runtime_error);
    }

    SUBCASE("matches the pair-counting oracle exactly, ties included") {
        RngStream rng(5, {static_cast<std::uint64_t>(StreamUse::test), 28});
        for (int it = 0; it < 300; ++it) {
            auto [labels, scores] = random_instance(rng, it % 2 == 0);
            CHECK(roc_auc(labels, scores) == roc_auc_pair_oracle(labels, scores));
        }
    }

    SUBCASE("score negation complements tie-free AUC") {
        RngStream rng(7, {static_cast<std::uint64_t>(StreamUse::test), 29});
        for (int it = 0; it < 50; ++it) {
            auto [labels, scores] = random_instance(rng, false);
            std::vector<double> neg;
            for (double s : scores) neg.push_back(-s);
            CHECK(roc_auc(labels, scores) + roc_auc(labels, neg) == doctest::Approx(1.0));
        }
    }

    SUBCASE("invariant under strictly monotone score transforms") {
        RngStream rng(11, {static_cast<std::uint64_t>(StreamUse::test), 30});
        for (int it = 0; it < 50; ++it) {
            auto [labels, scores] = random_instance(rng, it % 2 == 0);
            std::vector<double> warped;
            for (double s : scores) warped.push_back(std::exp(3.0 * s) + 1.0);
            CHECK(roc_auc(labels, scores) == roc_auc(labels, warped));
        }
    }
}

TEST_CASE("auc_pr average precision") {
    SUBCASE("perfect ranking") {
        CHECK(auc_pr({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1}) == doctest::Approx(1.0));
    }

    SUBCASE("single positive ranked last of four") {
        CHECK(auc_pr({0, 0, 0, 1}, {0.9, 0.8, 0.7, 0.1}) == doctest::Approx(0.25));
    }

    SUBCASE("three-point worked example") {
        double expected = 1.0 * 0.5 + (2.0 / 3.0) * 0.5;  // thresholds enumerated by hand
        CHECK(auc_pr({1, 0, 1}, {0.9, 0.8, 0.7}) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(auc_pr({1, 0, 1}, {0.9, 0.8, 0.7}) == doctest::Approx(0.8333).epsilon(1e-4));
    }

    SUBCASE("no positives is an error") {
        CHECK_THROWS_AS(auc_pr({0, 0}, {0.4, 0.6}), std::runtime_error);
    }

    SUBCASE("matches the threshold-sweep oracle exactly") {
        RngStream rng(13, {static_cast<std::uint64_t>(StreamUse::test), 31});
        for (int it = 0; it < 300; ++it) {
            auto [labels, scores] = random_instance(rng, it % 2 == 0);
            CHECK(auc_pr(labels, scores) == auc_pr_sweep_oracle(labels, scores));
        }
    }

    SUBCASE("invariant under strictly monotone score transforms") {
        RngStream rng(17, {static_cast<std::uint64_t>(StreamUse::test), 32});
        for (int it = 0; it < 50; ++it) {
            auto [labels, scores] = random_instance(rng, true);
            std::vector<double> warped;
            for (double s : scores) warped.push_back(2.0 * s + 5.0);
            CHECK(auc_pr(labels, scores) == auc_pr(labels, warped));
        }
    }
}

TEST_CASE("fold aggregation reports percent mean and sample std") {
    auto result_with = [](double f1) {
        EvalResult r;
        r.f1_macro = f1;
        r.roc_auc = f1;
        r.auc_pr = f1;
        return r;
    };

    SUBCASE("identical folds have zero std") {
        FoldAggregate a = aggregate_folds({result_with(0.7), result_with(0.7), result_with(0.7)});
        CHECK(a.f1_mean == doctest::Approx(70.0));
        CHECK(a.f1_std == doctest::Approx(0.0));
    }

    SUBCASE("two folds 0.6/0.8 give 70.0 +- 14.142") {
        FoldAggregate a = aggregate_folds({result_with(0.6), result_with(0.8)});
        CHECK(a.f1_mean == doctest::Approx(70.0));
        CHECK(a.f1_std == doctest::Approx(14.142).epsilon(1e-4));
    }

    SUBCASE("cells render in the mean +- std style") {
        FoldAggregate a = aggregate_folds({result_with(0.680), result_with(0.694)});
        CHECK(a.f1_cell() == "68.7 ± 1.0");
    }

    SUBCASE("fewer than two folds is an error") {
        CHECK_THROWS_AS(aggregate_folds({result_with(0.5)}), std::invalid_argument);
    }
}
