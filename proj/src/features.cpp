#include "propgat/features.hpp"

#include <cmath>
#include <stdexcept>

namespace propgat {

const std::vector<std::string>& prop_feature_names() {
    static const std::vector<std::string> names = {
        "log1p_followers", "log1p_followees", "log1p_statuses", "verified",
        "log1p_delay_seconds", "depth", "kind_news", "kind_tweet", "kind_retweet", "kind_reply",
    };
    return names;
}

Eigen::VectorXd propagation_features(const RawNode& node, const RawNode* parent, int depth) {
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(kPropFeatureDim);
    x[0] = std::log1p(static_cast<double>(node.followers));
    x[1] = std::log1p(static_cast<double>(node.followees));
    x[2] = std::log1p(static_cast<double>(node.statuses));
    x[3] = node.verified ? 1.0 : 0.0;
    std::int64_t delay = 0;
    if (parent && parent->timestamp && node.timestamp) {
        delay = std::max<std::int64_t>(0, *node.timestamp - *parent->timestamp);
    }
    x[4] = std::log1p(static_cast<double>(delay));
    x[5] = static_cast<double>(depth);
    switch (node.kind) {
        case NodeKind::news: x[6] = 1.0; break;
        case NodeKind::tweet: x[7] = 1.0; break;
        case NodeKind::retweet: x[8] = 1.0; break;
        case NodeKind::reply: x[9] = 1.0; break;
    }
    return x;
}

int feature_dim(const TextConfig& cfg, int d_text) {
    int d = kPropFeatureDim;
    if (cfg.use_profiles) d += d_text;
    if (cfg.use_retweets) d += d_text;
    return d;
}

int feature_dim(const TextConfig& cfg) { return feature_dim(cfg, cfg.default_text_dim()); }

FeatureMatrix assemble_features(const PropagationGraph& g, const TextConfig& cfg,
                                const StaticTable* table, const ContextualStore* store) {
    FeatureMatrix m;
    m.graph_id = g.graph_id;
    m.has_profile_segment = cfg.use_profiles;
    m.has_post_segment = cfg.use_retweets;
    m.text_dim = cfg.uses_text() ? text_dim(cfg, table, store) : 0;

    const int n = g.node_count();
    const int d = feature_dim(cfg, m.text_dim);
    m.X.resize(n, d);

    auto parent = g.parent_index();
    auto depth = g.depths();
    for (int v = 0; v < n; ++v) {
        const RawNode* p = parent[v] >= 0 ? &g.nodes[parent[v]] : nullptr;
        m.X.row(v).head(kPropFeatureDim) = propagation_features(g.nodes[v], p, depth[v]);
        if (cfg.uses_text()) {
            TextSegments seg = text_segments(cfg, g.nodes[v], table, store);
            int off = kPropFeatureDim;
            if (cfg.use_profiles) {
                m.X.row(v).segment(off, m.text_dim) = *seg.profile;
                off += m.text_dim;
            }
            if (cfg.use_retweets) {
                m.X.row(v).segment(off, m.text_dim) = *seg.post;
            }
        }
    }
    if (!m.X.allFinite()) {
        throw std::runtime_error("non-finite feature value in graph '" + g.graph_id + "'");
    }
    return m;
}

Normalizer fit_normalizer(const std::vector<const FeatureMatrix*>& train_matrices) {
    Normalizer nrm;
    nrm.mean = Eigen::VectorXd::Zero(kPropFeatureDim);
    nrm.std = Eigen::VectorXd::Ones(kPropFeatureDim);
    std::int64_t rows = 0;
    for (const auto* m : train_matrices) rows += m->X.rows();
    if (rows == 0) return nrm;

    for (const auto* m : train_matrices) {
        nrm.mean += m->X.leftCols(kPropFeatureDim).colwise().sum().transpose();
    }
    nrm.mean /= static_cast<double>(rows);

    Eigen::VectorXd var = Eigen::VectorXd::Zero(kPropFeatureDim);
    for (const auto* m : train_matrices) {
        Eigen::MatrixXd centered =
            m->X.leftCols(kPropFeatureDim).rowwise() - nrm.mean.transpose();
        var += centered.array().square().colwise().sum().matrix().transpose();
    }
    var /= static_cast<double>(rows);  // population variance
    for (int j = 0; j < kPropFeatureDim; ++j) {
        nrm.std[j] = var[j] > 0.0 ? std::sqrt(var[j]) : 1.0;
    }
    return nrm;
}

FeatureMatrix apply_normalizer(const Normalizer& nrm, const FeatureMatrix& m) {
    FeatureMatrix out = m;
    for (int j = 0; j < kPropFeatureDim; ++j) {
        out.X.col(j) = (out.X.col(j).array() - nrm.mean[j]) / nrm.std[j];
    }
    return out;
}

}  // namespace propgat
