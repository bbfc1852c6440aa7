#include "propgat/augment.hpp"

#include <stdexcept>

namespace propgat {

std::vector<int> oversample(const std::vector<int>& ids, const std::vector<Label>& labels,
                            RngStream& rng) {
    if (ids.size() != labels.size()) throw std::invalid_argument("ids/labels size mismatch");
    std::vector<int> fake, real;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        (labels[i] == Label::fake ? fake : real).push_back(ids[i]);
    }
    if (fake.empty() || real.empty()) {
        throw std::runtime_error("oversample: fold contains a single class");
    }
    std::vector<int> out(ids);
    const auto& minority = fake.size() < real.size() ? fake : real;
    std::size_t deficit =
        (fake.size() < real.size() ? real.size() - fake.size() : fake.size() - real.size());
    for (std::size_t i = 0; i < deficit; ++i) {
        out.push_back(minority[rng.uniform_int(minority.size())]);
    }
    return out;
}

Eigen::VectorXd neftune_noise(const Eigen::VectorXd& x, double alpha, RngStream& rng) {
    Eigen::RowVectorXd row = x.transpose();
    neftune_noise_inplace(row, alpha, [&rng] { return rng.uniform_pm1(); });
    return row.transpose();
}

void apply_noise_to_matrix_inplace(FeatureMatrix& m, const NoiseConfig& noise, RngStream& rng) {
    if (noise.alpha == 0.0 || m.text_dim == 0) return;
    auto draw = [&rng] { return rng.uniform_pm1(); };
    for (Eigen::Index v = 0; v < m.X.rows(); ++v) {
        if (m.has_profile_segment) {
            neftune_noise_inplace(m.X.row(v).segment(m.profile_offset(), m.text_dim),
                                  noise.alpha, draw);
        }
        if (m.has_post_segment) {
            neftune_noise_inplace(m.X.row(v).segment(m.post_offset(), m.text_dim), noise.alpha,
                                  draw);
        }
    }
}

FeatureMatrix apply_noise_to_matrix(const FeatureMatrix& m, const NoiseConfig& noise,
                                    RngStream& rng) {
    FeatureMatrix out = m;
    apply_noise_to_matrix_inplace(out, noise, rng);
    return out;
}

}  // namespace propgat
