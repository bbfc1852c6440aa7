#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "propgat/data_model.hpp"
#include "propgat/features.hpp"
#include "propgat/rng.hpp"

namespace propgat {

// Per-node aggregation lists: in-neighbors plus self, ascending index order.
// Information flows root -> leaves along diffusion edges; `reverse` flips the
// edge direction for ablation.
struct AggLists {
    std::vector<std::vector<int>> neigh;
    int node_count() const { return static_cast<int>(neigh.size()); }
};

AggLists aggregation_lists(const PropagationGraph& g, bool reverse = false);

constexpr int kGat1Heads = 4;
constexpr int kGatUnits = 32;  // per-head units; layer 1 concatenates to 128
constexpr int kMlpHidden = 16;

struct GatLayerParams {
    int head_count = 1;
    int d_in = 0;
    int d_out = 0;
    bool concat_heads = false;  // layer 1 concatenates, layer 2 is single-head
    bool elu_output = false;    // ELU after layer 1, identity after layer 2
    double leaky_slope = 0.2;
    std::vector<Eigen::MatrixXd> W;      // per head, d_in x d_out
    std::vector<Eigen::VectorXd> a_src;  // first half of the attention vector
    std::vector<Eigen::VectorXd> a_dst;  // second half

    int output_dim() const { return concat_heads ? head_count * d_out : d_out; }
};

struct MlpParams {
    Eigen::MatrixXd W1;  // kGatUnits x kMlpHidden
    Eigen::VectorXd b1;  // kMlpHidden
    Eigen::VectorXd w2;  // kMlpHidden
    Eigen::VectorXd b2;  // 1
};

struct ModelParams {
    GatLayerParams gat1;
    GatLayerParams gat2;
    MlpParams mlp;

    int input_dim() const { return gat1.d_in; }
};

// Model with the standard shapes (4-head 32-unit layer, single-head layer,
// 16-unit MLP) for input dimension d_in, all tensors zero.
ModelParams make_model(int d_in);

// Glorot-uniform weight matrices, zero attention vectors and biases.
void glorot_init(ModelParams& model, RngStream& rng);

// Visits every parameter tensor in a fixed order (flat storage + length).
void for_each_tensor(ModelParams& p,
                     const std::function<void(const std::string&, double*, int)>& fn);
void for_each_tensor(const ModelParams& p,
                     const std::function<void(const std::string&, const double*, int)>& fn);
void for_each_tensor_pair(ModelParams& a, const ModelParams& b,
                          const std::function<void(double*, const double*, int)>& fn);
int parameter_count(const ModelParams& p);
Eigen::VectorXd flatten_params(const ModelParams& p);
void unflatten_params(ModelParams& p, const Eigen::VectorXd& flat);
ModelParams zeros_like(const ModelParams& p);

struct GatLayerCache {
    std::vector<Eigen::MatrixXd> Z;                       // per head, V x d_out
    std::vector<std::vector<std::vector<double>>> attn;   // [head][node][k]
    std::vector<std::vector<std::vector<double>>> e_pre;  // pre-LeakyReLU logits
    Eigen::MatrixXd pre_out;                              // before output activation
    Eigen::MatrixXd out;
};

struct ForwardCache {
    GatLayerCache l1, l2;
    Eigen::VectorXd pooled;
    Eigen::VectorXd mlp_pre;     // hidden pre-activation
    Eigen::VectorXd mlp_hidden;  // after ReLU
    double logit = 0.0;
    double prob = 0.5;
};

// One attention layer. Attention coefficients over each node's aggregation
// list sum to 1 per head. Throws on dimension mismatch.
Eigen::MatrixXd gat_layer_forward(const GatLayerParams& layer, const Eigen::MatrixXd& H,
                                  const AggLists& agg, GatLayerCache* cache = nullptr);

Eigen::VectorXd mean_pool(const Eigen::MatrixXd& H);

// Full pipeline: GAT -> ELU -> GAT -> mean pool -> MLP -> sigmoid.
double forward(const ModelParams& model, const Eigen::MatrixXd& X, const AggLists& agg,
               ForwardCache* cache = nullptr);

constexpr double kProbClamp = 1e-7;

// Binary cross-entropy on the clamped probability; y in {0, 1}.
double bce_loss(double prob, double y);

// Accumulates weight * dL/dtheta for one graph into `grads` (shapes must
// match the model). Requires the cache produced by forward().
void backward_one(const ModelParams& model, const Eigen::MatrixXd& X, const AggLists& agg,
                  const ForwardCache& cache, double y, double weight, ModelParams& grads);

struct BatchExample {
    const FeatureMatrix* features = nullptr;
    const AggLists* agg = nullptr;
    double y = 0.0;
};

// Mean loss over the batch and its gradients. Throws if any gradient is
// non-finite, naming the offending tensor.
double backward_batch(const ModelParams& model, const std::vector<BatchExample>& batch,
                      ModelParams& grads);

struct AdamConfig {
    double lr = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    ModelParams m;  // first moments
    ModelParams v;  // second moments
    std::int64_t t = 0;
};

AdamState make_adam_state(const ModelParams& model);

// Bias-corrected Adam update: p -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               const AdamConfig& cfg);

struct TrainItem {
    const FeatureMatrix* features = nullptr;
    const AggLists* agg = nullptr;
    double y = 0.0;
};

struct TrainOptions {
    int epochs = 60;
    double lr = 5e-3;
    int batch_size = 0;  // 0 = full batch
    double alpha = 0.0;  // NEFTune amplitude applied to text segments
    std::uint64_t master_seed = 0;
    std::uint64_t config_key = 0;  // canonical config hash for stream splitting
    int fold = 0;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainState {
    ModelParams params;       // after the final epoch
    ModelParams best_params;  // snapshot at the best validation loss
    double best_val_loss = 0.0;
    int best_epoch = 0;
    std::vector<EpochStats> history;
};

// Fixed-epoch training with per-epoch noise on the (already oversampled)
// training items; validation is computed un-noised after every epoch and the
// best-validation snapshot is returned. epochs = 0 returns the init params
// with the initial validation loss.
TrainState train(const ModelParams& init, const std::vector<TrainItem>& train_items,
                 const std::vector<TrainItem>& val_items, const TrainOptions& opt);

double mean_val_loss(const ModelParams& model, const std::vector<TrainItem>& items);

}  // namespace propgat
