#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "propgat/data_model.hpp"
#include "propgat/features.hpp"
#include "propgat/rng.hpp"

namespace propgat {

// Noise amplitudes studied: {0, 5, 10, 15, 20, 25}. Noise is redrawn fresh
// per epoch for every (possibly duplicated) training instance.
struct NoiseConfig {
    double alpha = 0.0;
};

constexpr double kAlphaGrid[] = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0};

// Minority oversampling with replacement until class counts are equal.
// Returns every original index once plus the resampled minority indices;
// majority entries are never duplicated. Throws on a single-class fold.
std::vector<int> oversample(const std::vector<int>& ids, const std::vector<Label>& labels,
                            RngStream& rng);

// x' = x + (alpha / sqrt(||x||_2)) * eps, eps_i ~ Uniform(-1, 1).
// Identity when alpha = 0 or ||x|| = 0 (the printed scale would divide by
// zero there). `eps` is any callable returning one Uniform(-1,1) draw; `x`
// may be any writable Eigen vector expression (e.g. a row segment).
template <class Xpr, class UniformSource>
void neftune_noise_inplace(Xpr&& x, double alpha, UniformSource&& eps) {
    if (alpha == 0.0) return;
    double norm = x.norm();
    if (norm == 0.0) return;
    const double scale = alpha / std::sqrt(norm);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += scale * eps();
}

Eigen::VectorXd neftune_noise(const Eigen::VectorXd& x, double alpha, RngStream& rng);

// Perturbs each node's profile segment and post segment independently with
// fresh noise; the x1 block is left bit-identical. Rows are processed in
// node order, profile segment before post segment, so a given stream yields
// a reproducible result.
FeatureMatrix apply_noise_to_matrix(const FeatureMatrix& m, const NoiseConfig& noise,
                                    RngStream& rng);
void apply_noise_to_matrix_inplace(FeatureMatrix& m, const NoiseConfig& noise, RngStream& rng);

}  // namespace propgat
