#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "propgat/rng.hpp"
#include "propgat/stats.hpp"

using namespace propgat;

namespace {

// Fully independent exact oracle: zero removal, midranks by its own sort,
// then recursive enumeration of all 2^n sign assignments.
void enumerate_assignments(const std::vector<double>& ranks, std::size_t i, double w_pos,
                           double total, double w_obs, long& hits) {
    if (i == ranks.size()) {
        if (std::min(w_pos, total - w_pos) <= w_obs) ++hits;
        return;
    }
    enumerate_assignments(ranks, i + 1, w_pos + ranks[i], total, w_obs, hits);
    enumerate_assignments(ranks, i + 1, w_pos, total, w_obs, hits);
}

double wilcoxon_oracle(const std::vector<double>& a, const std::vector<double>& b,
                       bool* degenerate = nullptr) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    }
    if (degenerate) *degenerate = d.empty();
    if (d.empty()) return 1.0;
    const std::size_t n = d.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t x, std::size_t y) { return std::fabs(d[x]) < std::fabs(d[y]); });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::fabs(d[idx[j + 1]]) == std::fabs(d[idx[i]])) ++j;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = 0.5 * (i + j) + 1.0;
        i = j + 1;
    }
    double w_pos = 0.0, total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        total += rank[k];
        if (d[k] > 0) w_pos += rank[k];
    }
    double w_obs = std::min(w_pos, total - w_pos);
    long hits = 0;
    enumerate_assignments(rank, 0, 0.0, total, w_obs, hits);
    return static_cast<double>(hits) / std::pow(2.0, static_cast<double>(n));
}

}  // namespace

TEST_CASE("wilcoxon degenerate and exact reference cases") {
    SUBCASE("identical samples are degenerate with p = 1") {
        WilcoxonResult r = wilcoxon_signed_rank({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
        CHECK(r.degenerate);
        CHECK(r.p == 1.0);
    }

    SUBCASE("five positive distinct differences give exactly 2/32") {
        PairedSample s;
        s.b = {0, 0, 0, 0, 0};
        s.a = {1, 2, 3, 4, 5};
        WilcoxonResult r = wilcoxon_signed_rank(s);
        CHECK(r.exact);
        CHECK(r.w_minus == 0.0);
        CHECK(r.p == 0.0625);
    }

    SUBCASE("n=6 with one negative difference matches the enumeration oracle") {
        PairedSample s;
        s.b = {0, 0, 0, 0, 0, 0};
        s.a = {1, 2, 3, 4, 5, -6};
        WilcoxonResult r = wilcoxon_signed_rank(s);
        CHECK(r.exact);
        CHECK(r.w_minus == 6.0);
        CHECK(r.p == wilcoxon_oracle(s.a, s.b));
    }
}

TEST_CASE("wilcoxon exact branch equals the 2^n oracle on random instances") {
    RngStream rng(19, {static_cast<std::uint64_t>(StreamUse::test), 33});
    for (int it = 0; it < 150; ++it) {
        int n = 1 + static_cast<int>(rng.uniform_int(12));
        PairedSample s;
        for (int i = 0; i < n; ++i) {
            // small integer values produce zeros and rank ties
            s.a.push_back(static_cast<double>(rng.uniform_int(7)));
            s.b.push_back(static_cast<double>(rng.uniform_int(7)));
        }
        bool deg_oracle = false;
        double p_oracle = wilcoxon_oracle(s.a, s.b, &deg_oracle);
        WilcoxonResult r = wilcoxon_signed_rank(s);
        CAPTURE(it);
        CHECK(r.degenerate == deg_oracle);
        CHECK(r.p == p_oracle);
    }
}

TEST_CASE("wilcoxon is antisymmetric and shift-sensitive") {
    RngStream rng(23, {static_cast<std::uint64_t>(StreamUse::test), 34});

    SUBCASE("swapping the samples keeps the two-sided p") {
        for (int it = 0; it < 60; ++it) {
            int n = 2 + static_cast<int>(rng.uniform_int(10));
            PairedSample s;
            for (int i = 0; i < n; ++i) {
                s.a.push_back(rng.uniform(-3, 3));
                s.b.push_back(rng.uniform(-3, 3));
            }
            PairedSample swapped{s.b, s.a};
            CHECK(wilcoxon_signed_rank(s).p == wilcoxon_signed_rank(swapped).p);
        }
    }

    SUBCASE("a dominating constant shift drives w_minus to zero and p to the minimum") {
        int n = 9;
        PairedSample s;
        for (int i = 0; i < n; ++i) {
            double b = rng.uniform(-1, 1);
            s.b.push_back(b);
            s.a.push_back(b + 5.0);
        }
        WilcoxonResult r = wilcoxon_signed_rank(s);
        CHECK(r.w_minus == 0.0);
        CHECK(r.p == std::pow(2.0, 1.0 - n));  // 2 / 2^n
    }
}

TEST_CASE("wilcoxon normal branch activates beyond n = 20 and stays in range") {
    RngStream rng(29, {static_cast<std::uint64_t>(StreamUse::test), 35});
    PairedSample s;
    for (int i = 0; i < 40; ++i) {
        s.a.push_back(rng.uniform(0, 1) + 0.15);
        s.b.push_back(rng.uniform(0, 1));
    }
    WilcoxonResult r = wilcoxon_signed_rank(s);
    CHECK(!r.exact);
    CHECK(r.p >= 0.0);
    CHECK(r.p <= 1.0);
    CHECK(r.p < 0.05);  // planted shift should be detected
}

TEST_CASE("holm adjustment") {
    SUBCASE("worked three-value example") {
        std::vector<double> adj = holm_adjust({0.01, 0.04, 0.03});
        REQUIRE(adj.size() == 3);
        CHECK(adj[0] == doctest::Approx(0.03).epsilon(1e-12));
        CHECK(adj[1] == doctest::Approx(0.06).epsilon(1e-12));
        CHECK(adj[2] == doctest::Approx(0.06).epsilon(1e-12));
    }

    SUBCASE("single p is unchanged and all-ones stay ones") {
        CHECK(holm_adjust({0.2}) == std::vector<double>{0.2});
        CHECK(holm_adjust({1.0, 1.0, 1.0}) == std::vector<double>{1.0, 1.0, 1.0});
    }

    SUBCASE("adjusted values dominate raw ones and preserve the ordering") {
        RngStream rng(31, {static_cast<std::uint64_t>(StreamUse::test), 36});
        for (int it = 0; it < 200; ++it) {
            int m = 1 + static_cast<int>(rng.uniform_int(12));
            std::vector<double> p(m);
            for (auto& v : p) v = rng.u01();
            std::vector<double> adj = holm_adjust(p);
            std::vector<std::size_t> order(m);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
            for (int k = 0; k < m; ++k) {
                CHECK(adj[k] >= p[k]);
                CHECK(adj[k] <= 1.0);
                if (k > 0) CHECK(adj[order[k]] >= adj[order[k - 1]]);
                // significance flags shrink under adjustment
                if (adj[k] < 0.05) CHECK(p[k] < 0.05);
            }
        }
    }
}

namespace {

std::vector<GroupedFoldValues> synthetic_alpha_grid(double per_alpha_drop, int n_folds,
                                                    double noise, RngStream& rng) {
    const double alphas[] = {0, 5, 10, 15, 20, 25};
    std::vector<GroupedFoldValues> groups;
    for (int combo = 0; combo < 8; ++combo) {
        for (int ai = 0; ai < 6; ++ai) {
            GroupedFoldValues g;
            g.axis_value = std::to_string(static_cast<int>(alphas[ai]));
            g.pairing_key = "combo" + std::to_string(combo);
            for (int f = 0; f < n_folds; ++f) {
                double base = 0.7 + 0.02 * combo + 0.01 * f;
                g.folds.push_back(base - per_alpha_drop * ai + noise * rng.uniform(-1, 1));
            }
            groups.push_back(g);
        }
    }
    return groups;
}

}  // namespace

TEST_CASE("pairwise table over the alpha axis") {
    RngStream rng(37, {static_cast<std::uint64_t>(StreamUse::test), 37});

    SUBCASE("six levels produce exactly 15 comparisons") {
        auto groups = synthetic_alpha_grid(0.01, 10, 0.0, rng);
        PValueTable t = pairwise_table(groups, "alpha", "f1_macro");
        CHECK(t.comparisons.size() == 15);
        CHECK(t.comparisons.front().label == "0 vs 5");
        CHECK(t.comparisons.back().label == "20 vs 25");
    }

    SUBCASE("a strict monotone degradation rejects everywhere") {
        auto groups = synthetic_alpha_grid(0.01, 10, 0.0, rng);
        PValueTable t = pairwise_table(groups, "alpha", "f1_macro");
        for (const auto& cmp : t.comparisons) {
            CAPTURE(cmp.label);
            CHECK(cmp.n_pairs == 80);
            CHECK(cmp.p_raw < 0.05);
            CHECK(!cmp.degenerate);
        }
    }

    SUBCASE("identical groups are degenerate with p = 1") {
        std::vector<GroupedFoldValues> groups;
        for (const char* v : {"a", "b"}) {
            GroupedFoldValues g;
            g.axis_value = v;
            g.pairing_key = "combo0";
            g.folds = {0.5, 0.6, 0.7};
            groups.push_back(g);
        }
        PValueTable t = pairwise_table(groups, "encoder", "f1_macro");
        REQUIRE(t.comparisons.size() == 1);
        CHECK(t.comparisons[0].degenerate);
        CHECK(t.comparisons[0].p_raw == 1.0);
    }

    SUBCASE("misaligned folds are rejected") {
        std::vector<GroupedFoldValues> groups;
        GroupedFoldValues a;
        a.axis_value = "0";
        a.pairing_key = "c";
        a.folds = {0.5, 0.6};
        GroupedFoldValues b;
        b.axis_value = "5";
        b.pairing_key = "c";
        b.folds = {0.5};
        groups.push_back(a);
        groups.push_back(b);
        CHECK_THROWS_AS(pairwise_table(groups, "alpha", "f1_macro"), std::runtime_error);
    }
}
