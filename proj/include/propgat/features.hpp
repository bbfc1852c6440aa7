#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "propgat/data_model.hpp"
#include "propgat/text_embed.hpp"

namespace propgat {

// Propagation feature block x1, fixed order:
//   [log1p(followers), log1p(followees), log1p(statuses), verified,
//    log1p(delay_seconds), depth, one-hot kind(news, tweet, retweet, reply)]
constexpr int kPropFeatureDim = 10;

const std::vector<std::string>& prop_feature_names();

// x1 for one node. delay is clamped to zero on timestamp inversions and is
// zero whenever either endpoint lacks a timestamp (the news node never has
// one).
Eigen::VectorXd propagation_features(const RawNode& node, const RawNode* parent, int depth);

// Total feature dimension D = 10 + d_text per enabled source.
int feature_dim(const TextConfig& cfg, int d_text);
// Paper-scale convenience overload (d_text = 100 static / 768 contextual).
int feature_dim(const TextConfig& cfg);

// Node-feature matrix of one graph; row order matches node order. Column
// layout is [x1 | x2? | x3?] with the segment boundaries recorded so
// augmentation can address the text blocks.
struct FeatureMatrix {
    std::string graph_id;
    Eigen::MatrixXd X;
    int text_dim = 0;
    bool has_profile_segment = false;
    bool has_post_segment = false;

    int profile_offset() const { return kPropFeatureDim; }
    int post_offset() const {
        return kPropFeatureDim + (has_profile_segment ? text_dim : 0);
    }
};

FeatureMatrix assemble_features(const PropagationGraph& g, const TextConfig& cfg,
                                const StaticTable* table, const ContextualStore* store);

// Per-column standardization of the x1 block, fit on training data only.
// Population standard deviation; zero-variance columns get std = 1.
struct Normalizer {
    Eigen::VectorXd mean;  // kPropFeatureDim
    Eigen::VectorXd std;   // kPropFeatureDim, entries > 0
};

Normalizer fit_normalizer(const std::vector<const FeatureMatrix*>& train_matrices);
FeatureMatrix apply_normalizer(const Normalizer& nrm, const FeatureMatrix& m);

}  // namespace propgat
