#include <doctest.h>

#include <cmath>

#include "propgat/features.hpp"
#include "test_util.hpp"

using namespace propgat;

namespace {

StaticTable table_of_dim(int d, RngStream& rng, int words = 10) {
    StaticTable t;
    t.dimension = d;
    static const char* vocab[] = {"alpha", "beta",  "gamma", "delta", "omega",
                                  "news",  "share", "look",  "wow",   "breaking"};
    for (int w = 0; w < words; ++w) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.uniform(-1, 1);
        t.entries[vocab[w]] = v;
    }
    return t;
}

ContextualStore store_for_graph(const PropagationGraph& g, int d, RngStream& rng) {
    ContextualStore s;
    s.dimension = d;
    for (const auto& n : g.nodes) {
        if (n.kind == NodeKind::news) continue;
        for (TextSource src : {TextSource::profile, TextSource::post}) {
            Eigen::VectorXd v(d);
            for (int i = 0; i < d; ++i) v[i] = rng.uniform(-1, 1);
            s.entries[ContextualStore::key(n.id, src)] = v;
        }
    }
    return s;
}

}  // namespace

TEST_CASE("propagation features of the news node are the zero-sentinel row") {
    RawNode news;
    news.id = "n";
    news.kind = NodeKind::news;
    Eigen::VectorXd x = propagation_features(news, nullptr, 0);
    REQUIRE(x.size() == kPropFeatureDim);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(kPropFeatureDim);
    expected[6] = 1.0;  // one-hot news
    CHECK((x - expected).norm() == 0.0);
}

TEST_CASE("propagation features apply log1p and one-hot encoding") {
    RawNode parent;
    parent.id = "p";
    parent.kind = NodeKind::tweet;
    parent.timestamp = 1000;

    SUBCASE("retweet with zero counts at depth 2") {
        RawNode rt;
        rt.id = "r";
        rt.kind = NodeKind::retweet;
        rt.timestamp = 1000;  // zero delay
        Eigen::VectorXd x = propagation_features(rt, &parent, 2);
        CHECK(x[0] == 0.0);  // log1p(0)
        CHECK(x[3] == 0.0);
        CHECK(x[4] == 0.0);  // log1p(0 delay)
        CHECK(x[5] == 2.0);
        CHECK(x[6] == 0.0);
        CHECK(x[7] == 0.0);
        CHECK(x[8] == 1.0);
        CHECK(x[9] == 0.0);
    }

    SUBCASE("log1p terms match an independent evaluation") {
        RawNode tw;
        tw.id = "t";
        tw.kind = NodeKind::tweet;
        tw.followers = 99;
        tw.timestamp = 1001;  // delay 1
        Eigen::VectorXd x = propagation_features(tw, &parent, 1);
        CHECK(x[0] == doctest::Approx(std::log(100.0)).epsilon(1e-9));
        CHECK(x[4] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
        CHECK(x[0] == doctest::Approx(4.6051701860).epsilon(1e-9));
    }

    SUBCASE("timestamp inversion clamps to zero delay") {
        RawNode late;
        late.id = "l";
        late.kind = NodeKind::reply;
        late.timestamp = 500;  // before the parent
        Eigen::VectorXd x = propagation_features(late, &parent, 1);
        CHECK(x[4] == 0.0);
    }

    SUBCASE("exactly one kind flag is set") {
        for (NodeKind k : {NodeKind::news, NodeKind::tweet, NodeKind::retweet, NodeKind::reply}) {
            RawNode n;
            n.id = "x";
            n.kind = k;
            Eigen::VectorXd x = propagation_features(n, nullptr, 0);
            CHECK(x.segment(6, 4).sum() == 1.0);
        }
    }
}

TEST_CASE("feature_dim composes the enabled segments") {
    CHECK(feature_dim(TextConfig{Encoder::static_, false, false}) == 10);
    CHECK(feature_dim(TextConfig{Encoder::contextual, false, false}) == 10);
    CHECK(feature_dim(TextConfig{Encoder::static_, false, true}) == 110);
    CHECK(feature_dim(TextConfig{Encoder::contextual, true, true}) == 1546);
    CHECK(feature_dim(TextConfig{Encoder::static_, true, true}, 7) == 24);
}

TEST_CASE("assemble_features produces the documented layout") {
    RngStream rng(11, {static_cast<std::uint64_t>(StreamUse::test), 5});

    SUBCASE("single news node without text") {
        PropagationGraph g = merge_diffusion_trees("n1", Label::fake, {});
        FeatureMatrix m = assemble_features(g, TextConfig{Encoder::static_, false, false},
                                            nullptr, nullptr);
        CHECK(m.X.rows() == 1);
        CHECK(m.X.cols() == 10);
    }

    SUBCASE("static retweets-only columns equal direct embedding calls") {
        PropagationGraph g = testutil::random_graph(rng, 6, Label::real, "g0");
        StaticTable table = table_of_dim(7, rng);
        TextConfig cfg{Encoder::static_, false, true};
        FeatureMatrix m = assemble_features(g, cfg, &table, nullptr);
        REQUIRE(m.X.cols() == 17);
        for (int v = 0; v < g.node_count(); ++v) {
            Eigen::VectorXd direct = embed_text_static(table, g.nodes[v].post_text);
            CHECK((m.X.row(v).segment(10, 7).transpose() - direct).norm() == 0.0);
        }
    }

    SUBCASE("no-text matrices are identical under encoder swap") {
        PropagationGraph g = testutil::random_graph(rng, 8, Label::fake, "g1");
        FeatureMatrix a = assemble_features(g, TextConfig{Encoder::static_, false, false},
                                            nullptr, nullptr);
        FeatureMatrix b = assemble_features(g, TextConfig{Encoder::contextual, false, false},
                                            nullptr, nullptr);
        CHECK(a.X == b.X);
    }
}

TEST_CASE("feature matrix shape and x1 block hold over random graphs and all 8 configs") {
    RngStream rng(13, {static_cast<std::uint64_t>(StreamUse::test), 6});
    StaticTable table = table_of_dim(5, rng);
    for (int it = 0; it < 25; ++it) {
        PropagationGraph g = testutil::random_graph(rng, 12, Label::real, "g" + std::to_string(it));
        ContextualStore store = store_for_graph(g, 6, rng);
        Eigen::MatrixXd x1_ref;
        for (Encoder enc : {Encoder::static_, Encoder::contextual}) {
            for (bool prof : {false, true}) {
                for (bool rt : {false, true}) {
                    TextConfig cfg{enc, prof, rt};
                    FeatureMatrix m = assemble_features(g, cfg, &table, &store);
                    int d_text = enc == Encoder::static_ ? 5 : 6;
                    CHECK(m.X.rows() == g.node_count());
                    CHECK(m.X.cols() == feature_dim(cfg, d_text));
                    CHECK(m.X.allFinite());
                    if (x1_ref.size() == 0) x1_ref = m.X.leftCols(10);
                    CHECK(m.X.leftCols(10) == x1_ref);
                }
            }
        }
    }
}

TEST_CASE("normalizer standardizes the x1 block only") {
    SUBCASE("constant column gets std 1 and zero output") {
        FeatureMatrix m;
        m.X = Eigen::MatrixXd::Constant(4, 10, 3.5);
        Normalizer nrm = fit_normalizer({&m});
        CHECK(nrm.std.minCoeff() == 1.0);
        FeatureMatrix out = apply_normalizer(nrm, m);
        CHECK(out.X.isZero());
    }

    SUBCASE("column {0,2} maps to {-1,+1} under population std") {
        FeatureMatrix m;
        m.X = Eigen::MatrixXd::Zero(2, 10);
        m.X(1, 0) = 2.0;
        Normalizer nrm = fit_normalizer({&m});
        CHECK(nrm.mean[0] == doctest::Approx(1.0));
        CHECK(nrm.std[0] == doctest::Approx(1.0));
        FeatureMatrix out = apply_normalizer(nrm, m);
        CHECK(out.X(0, 0) == doctest::Approx(-1.0));
        CHECK(out.X(1, 0) == doctest::Approx(1.0));
    }

    SUBCASE("random block is z-scored; text columns untouched") {
        RngStream rng(17, {static_cast<std::uint64_t>(StreamUse::test), 7});
        FeatureMatrix m;
        m.text_dim = 3;
        m.has_post_segment = true;
        m.X = testutil::random_matrix(rng, 5, 13, 4.0);
        Eigen::MatrixXd text_before = m.X.rightCols(3);
        Normalizer nrm = fit_normalizer({&m});
        FeatureMatrix out = apply_normalizer(nrm, m);
        CHECK(out.X.rightCols(3) == text_before);
        // recompute moments per column with an independent loop
        for (int j = 0; j < 10; ++j) {
            double mean = 0.0;
            for (int r = 0; r < 5; ++r) mean += out.X(r, j);
            mean /= 5.0;
            double var = 0.0;
            for (int r = 0; r < 5; ++r) var += (out.X(r, j) - mean) * (out.X(r, j) - mean);
            var /= 5.0;
            CHECK(std::fabs(mean) <= 1e-9);
            CHECK(std::fabs(std::sqrt(var) - 1.0) <= 1e-9);
        }
    }

    SUBCASE("fit-transform on the fit data leaves near-zero column means") {
        RngStream rng(19, {static_cast<std::uint64_t>(StreamUse::test), 8});
        std::vector<FeatureMatrix> ms(3);
        std::vector<const FeatureMatrix*> ptrs;
        for (auto& m : ms) {
            m.X = testutil::random_matrix(rng, 6, 10, 2.0);
            ptrs.push_back(&m);
        }
        Normalizer nrm = fit_normalizer(ptrs);
        Eigen::VectorXd col_sum = Eigen::VectorXd::Zero(10);
        int rows = 0;
        for (const auto& m : ms) {
            FeatureMatrix out = apply_normalizer(nrm, m);
            col_sum += out.X.colwise().sum().transpose();
            rows += static_cast<int>(out.X.rows());
        }
        CHECK((col_sum / rows).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}
