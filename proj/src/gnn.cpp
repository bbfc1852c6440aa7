#include "propgat/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "propgat/augment.hpp"

namespace propgat {

AggLists aggregation_lists(const PropagationGraph& g, bool reverse) {
    AggLists agg;
    agg.neigh.resize(g.nodes.size());
    for (int v = 0; v < g.node_count(); ++v) agg.neigh[v].push_back(v);
    for (const auto& [p, c] : g.edges) {
        if (reverse) {
            agg.neigh[p].push_back(c);
        } else {
            agg.neigh[c].push_back(p);
        }
    }
    for (auto& list : agg.neigh) std::sort(list.begin(), list.end());
    return agg;
}

ModelParams make_model(int d_in) {
    ModelParams m;
    m.gat1.head_count = kGat1Heads;
    m.gat1.d_in = d_in;
    m.gat1.d_out = kGatUnits;
    m.gat1.concat_heads = true;
    m.gat1.elu_output = true;
    m.gat2.head_count = 1;
    m.gat2.d_in = kGat1Heads * kGatUnits;
    m.gat2.d_out = kGatUnits;
    m.gat2.concat_heads = false;
    m.gat2.elu_output = false;
    for (auto* layer : {&m.gat1, &m.gat2}) {
        layer->W.assign(layer->head_count, Eigen::MatrixXd::Zero(layer->d_in, layer->d_out));
        layer->a_src.assign(layer->head_count, Eigen::VectorXd::Zero(layer->d_out));
        layer->a_dst.assign(layer->head_count, Eigen::VectorXd::Zero(layer->d_out));
    }
    m.mlp.W1 = Eigen::MatrixXd::Zero(kGatUnits, kMlpHidden);
    m.mlp.b1 = Eigen::VectorXd::Zero(kMlpHidden);
    m.mlp.w2 = Eigen::VectorXd::Zero(kMlpHidden);
    m.mlp.b2 = Eigen::VectorXd::Zero(1);
    return m;
}

namespace {

void glorot_fill(Eigen::Ref<Eigen::MatrixXd> W, int fan_in, int fan_out, RngStream& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    double* data = W.data();
    for (Eigen::Index i = 0; i < W.size(); ++i) data[i] = rng.uniform(-limit, limit);
}

}  // namespace

void glorot_init(ModelParams& model, RngStream& rng) {
    for (auto* layer : {&model.gat1, &model.gat2}) {
        for (int h = 0; h < layer->head_count; ++h) {
            glorot_fill(layer->W[h], layer->d_in, layer->d_out, rng);
            layer->a_src[h].setZero();
            layer->a_dst[h].setZero();
        }
    }
    glorot_fill(model.mlp.W1, kGatUnits, kMlpHidden, rng);
    model.mlp.b1.setZero();
    Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(kMlpHidden, 1);
    glorot_fill(w2, kMlpHidden, 1, rng);
    model.mlp.w2 = w2.col(0);
    model.mlp.b2.setZero();
}

namespace {

template <class P, class Fn>
void visit_tensors(P& p, const Fn& fn) {
    auto layer_name = [](int idx) { return idx == 0 ? std::string("gat1") : std::string("gat2"); };
    int idx = 0;
    for (auto* layer : {&p.gat1, &p.gat2}) {
        for (int h = 0; h < layer->head_count; ++h) {
            fn(layer_name(idx) + ".W" + std::to_string(h), layer->W[h].data(),
               static_cast<int>(layer->W[h].size()));
            fn(layer_name(idx) + ".a_src" + std::to_string(h), layer->a_src[h].data(),
               static_cast<int>(layer->a_src[h].size()));
            fn(layer_name(idx) + ".a_dst" + std::to_string(h), layer->a_dst[h].data(),
               static_cast<int>(layer->a_dst[h].size()));
        }
        ++idx;
    }
    fn("mlp.W1", p.mlp.W1.data(), static_cast<int>(p.mlp.W1.size()));
    fn("mlp.b1", p.mlp.b1.data(), static_cast<int>(p.mlp.b1.size()));
    fn("mlp.w2", p.mlp.w2.data(), static_cast<int>(p.mlp.w2.size()));
    fn("mlp.b2", p.mlp.b2.data(), static_cast<int>(p.mlp.b2.size()));
}

}  // namespace

void for_each_tensor(ModelParams& p,
                     const std::function<void(const std::string&, double*, int)>& fn) {
    visit_tensors(p, fn);
}

void for_each_tensor(const ModelParams& p,
                     const std::function<void(const std::string&, const double*, int)>& fn) {
    visit_tensors(p, fn);
}

void for_each_tensor_pair(ModelParams& a, const ModelParams& b,
                          const std::function<void(double*, const double*, int)>& fn) {
    std::vector<std::pair<const double*, int>> bs;
    for_each_tensor(b, [&](const std::string&, const double* d, int n) { bs.emplace_back(d, n); });
    std::size_t i = 0;
    for_each_tensor(a, [&](const std::string&, double* d, int n) {
        if (i >= bs.size() || bs[i].second != n) {
            throw std::invalid_argument("parameter shape mismatch");
        }
        fn(d, bs[i].first, n);
        ++i;
    });
}

int parameter_count(const ModelParams& p) {
    int total = 0;
    for_each_tensor(p, [&](const std::string&, const double*, int n) { total += n; });
    return total;
}

Eigen::VectorXd flatten_params(const ModelParams& p) {
    Eigen::VectorXd flat(parameter_count(p));
    int off = 0;
    for_each_tensor(p, [&](const std::string&, const double* d, int n) {
        flat.segment(off, n) = Eigen::Map<const Eigen::VectorXd>(d, n);
        off += n;
    });
    return flat;
}

void unflatten_params(ModelParams& p, const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count(p)) throw std::invalid_argument("flat size mismatch");
    int off = 0;
    for_each_tensor(p, [&](const std::string&, double* d, int n) {
        Eigen::Map<Eigen::VectorXd>(d, n) = flat.segment(off, n);
        off += n;
    });
}

ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    for_each_tensor(z, [](const std::string&, double* d, int n) {
        std::fill(d, d + n, 0.0);
    });
    return z;
}

namespace {

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

namespace {

void gat_layer_forward_into(const GatLayerParams& layer, const Eigen::MatrixXd& H,
                            const AggLists& agg, GatLayerCache& c) {
    const int V = static_cast<int>(H.rows());
    if (H.cols() != layer.d_in) {
        throw std::invalid_argument("gat layer expects " + std::to_string(layer.d_in) +
                                    " input columns, got " + std::to_string(H.cols()));
    }
    if (agg.node_count() != V) throw std::invalid_argument("aggregation list / matrix size mismatch");
    if (!layer.concat_heads && layer.head_count != 1) {
        throw std::invalid_argument("non-concat merge requires a single head");
    }

    c.Z.resize(layer.head_count);
    c.attn.resize(layer.head_count);
    c.e_pre.resize(layer.head_count);
    c.pre_out.resize(V, layer.output_dim());

    Eigen::RowVectorXd row(layer.d_out);
    for (int h = 0; h < layer.head_count; ++h) {
        Eigen::MatrixXd& Z = c.Z[h];
        Z.noalias() = H * layer.W[h];
        Eigen::VectorXd s = Z * layer.a_src[h];
        Eigen::VectorXd t = Z * layer.a_dst[h];
        auto& attn_h = c.attn[h];
        auto& epre_h = c.e_pre[h];
        attn_h.resize(V);
        epre_h.resize(V);
        for (int i = 0; i < V; ++i) {
            const auto& list = agg.neigh[i];
            auto& coeff = attn_h[i];
            auto& epre = epre_h[i];
            coeff.resize(list.size());
            epre.resize(list.size());
            double max_e = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < list.size(); ++k) {
                epre[k] = s[i] + t[list[k]];
                double e = leaky_relu(epre[k], layer.leaky_slope);
                coeff[k] = e;
                max_e = std::max(max_e, e);
            }
            double denom = 0.0;
            for (double& e : coeff) {
                e = std::exp(e - max_e);
                denom += e;
            }
            row.setZero();
            for (std::size_t k = 0; k < list.size(); ++k) {
                coeff[k] /= denom;
                row += coeff[k] * Z.row(list[k]);
            }
            if (layer.concat_heads) {
                c.pre_out.row(i).segment(h * layer.d_out, layer.d_out) = row;
            } else {
                c.pre_out.row(i) = row;
            }
        }
    }

    if (layer.elu_output) {
        c.out = c.pre_out.unaryExpr([](double x) { return elu(x); });
    } else {
        c.out = c.pre_out;
    }
}

}  // namespace

Eigen::MatrixXd gat_layer_forward(const GatLayerParams& layer, const Eigen::MatrixXd& H,
                                  const AggLists& agg, GatLayerCache* cache) {
    GatLayerCache local;
    GatLayerCache& c = cache ? *cache : local;
    gat_layer_forward_into(layer, H, agg, c);
    return c.out;
}

Eigen::VectorXd mean_pool(const Eigen::MatrixXd& H) {
    if (H.rows() == 0) throw std::invalid_argument("mean_pool of empty matrix");
    return H.colwise().mean().transpose();
}

double forward(const ModelParams& model, const Eigen::MatrixXd& X, const AggLists& agg,
               ForwardCache* cache) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    gat_layer_forward_into(model.gat1, X, agg, c.l1);
    gat_layer_forward_into(model.gat2, c.l1.out, agg, c.l2);
    c.pooled = mean_pool(c.l2.out);
    c.mlp_pre = model.mlp.W1.transpose() * c.pooled + model.mlp.b1;
    c.mlp_hidden = c.mlp_pre.cwiseMax(0.0);
    c.logit = model.mlp.w2.dot(c.mlp_hidden) + model.mlp.b2[0];
    c.prob = sigmoid(c.logit);
    return c.prob;
}

double bce_loss(double prob, double y) {
    double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
    return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

namespace {

// Backward through one GAT layer. dOut is the gradient w.r.t. the activated
// layer output; returns the gradient w.r.t. the layer input and accumulates
// parameter gradients (scaled by the caller via dOut).
Eigen::MatrixXd gat_layer_backward(const GatLayerParams& layer, const Eigen::MatrixXd& H,
                                   const AggLists& agg, const GatLayerCache& cache,
                                   const Eigen::MatrixXd& dOut, GatLayerParams& grads) {
    const int V = static_cast<int>(H.rows());
    Eigen::MatrixXd dPre = dOut;
    if (layer.elu_output) {
        for (Eigen::Index i = 0; i < dPre.size(); ++i) {
            dPre.data()[i] *= elu_grad(cache.pre_out.data()[i]);
        }
    }

    Eigen::MatrixXd dH = Eigen::MatrixXd::Zero(V, layer.d_in);
    std::vector<double> dalpha;
    for (int h = 0; h < layer.head_count; ++h) {
        const Eigen::MatrixXd& Z = cache.Z[h];
        Eigen::Ref<const Eigen::MatrixXd> Dh =
            layer.concat_heads ? dPre.middleCols(h * layer.d_out, layer.d_out)
                               : dPre.middleCols(0, layer.d_out);
        Eigen::MatrixXd dZ = Eigen::MatrixXd::Zero(V, layer.d_out);
        Eigen::VectorXd ds = Eigen::VectorXd::Zero(V);
        Eigen::VectorXd dt = Eigen::VectorXd::Zero(V);

        for (int i = 0; i < V; ++i) {
            const auto& list = agg.neigh[i];
            const auto& coeff = cache.attn[h][i];
            const auto& epre = cache.e_pre[h][i];
            dalpha.resize(list.size());
            double weighted = 0.0;
            for (std::size_t k = 0; k < list.size(); ++k) {
                dalpha[k] = Dh.row(i).dot(Z.row(list[k]));
                weighted += coeff[k] * dalpha[k];
            }
            for (std::size_t k = 0; k < list.size(); ++k) {
                int j = list[k];
                dZ.row(j) += coeff[k] * Dh.row(i);
                double de = coeff[k] * (dalpha[k] - weighted);
                double dpre_e = de * leaky_relu_grad(epre[k], layer.leaky_slope);
                ds[i] += dpre_e;
                dt[j] += dpre_e;
            }
        }

        grads.a_src[h] += Z.transpose() * ds;
        grads.a_dst[h] += Z.transpose() * dt;
        dZ += ds * layer.a_src[h].transpose();
        dZ += dt * layer.a_dst[h].transpose();
        grads.W[h] += H.transpose() * dZ;
        dH += dZ * layer.W[h].transpose();
    }
    return dH;
}

}  // namespace

void backward_one(const ModelParams& model, const Eigen::MatrixXd& X, const AggLists& agg,
                  const ForwardCache& cache, double y, double weight, ModelParams& grads) {
    const int V = static_cast<int>(X.rows());
    double dlogit = 0.0;
    if (cache.prob > kProbClamp && cache.prob < 1.0 - kProbClamp) {
        dlogit = (cache.prob - y) * weight;
    }

    grads.mlp.w2 += dlogit * cache.mlp_hidden;
    grads.mlp.b2[0] += dlogit;
    Eigen::VectorXd dHidden = dlogit * model.mlp.w2;
    Eigen::VectorXd dPre1 = dHidden;
    for (int j = 0; j < dPre1.size(); ++j) {
        if (cache.mlp_pre[j] <= 0.0) dPre1[j] = 0.0;
    }
    grads.mlp.W1 += cache.pooled * dPre1.transpose();
    grads.mlp.b1 += dPre1;
    Eigen::VectorXd dPooled = model.mlp.W1 * dPre1;

    Eigen::MatrixXd dH2(V, dPooled.size());
    dH2 = (Eigen::VectorXd::Ones(V) / static_cast<double>(V)) * dPooled.transpose();

    Eigen::MatrixXd dH1 =
        gat_layer_backward(model.gat2, cache.l1.out, agg, cache.l2, dH2, grads.gat2);
    gat_layer_backward(model.gat1, X, agg, cache.l1, dH1, grads.gat1);
}

namespace {

void set_zero(ModelParams& p) {
    for_each_tensor(p, [](const std::string&, double* d, int n) { std::fill(d, d + n, 0.0); });
}

void check_gradients_finite(const ModelParams& grads) {
    for_each_tensor(grads, [](const std::string& name, const double* d, int n) {
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(d[i])) {
                throw std::runtime_error("non-finite gradient in tensor " + name);
            }
        }
    });
}

}  // namespace

double backward_batch(const ModelParams& model, const std::vector<BatchExample>& batch,
                      ModelParams& grads) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const double w = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    ForwardCache cache;
    for (const auto& ex : batch) {
        forward(model, ex.features->X, *ex.agg, &cache);
        loss += bce_loss(cache.prob, ex.y) * w;
        backward_one(model, ex.features->X, *ex.agg, cache, ex.y, w, grads);
    }
    check_gradients_finite(grads);
    return loss;
}

AdamState make_adam_state(const ModelParams& model) {
    AdamState s;
    s.m = zeros_like(model);
    s.v = zeros_like(model);
    s.t = 0;
    return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               const AdamConfig& cfg) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    std::vector<std::pair<double*, int>> moments1, moments2;
    for_each_tensor(state.m, [&](const std::string&, double* d, int n) {
        moments1.emplace_back(d, n);
    });
    for_each_tensor(state.v, [&](const std::string&, double* d, int n) {
        moments2.emplace_back(d, n);
    });
    std::size_t idx = 0;
    for_each_tensor_pair(params, grads, [&](double* p, const double* g, int n) {
        double* m = moments1[idx].first;
        double* v = moments2[idx].first;
        for (int i = 0; i < n; ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            p[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
        ++idx;
    });
}

double mean_val_loss(const ModelParams& model, const std::vector<TrainItem>& items) {
    if (items.empty()) throw std::invalid_argument("empty validation set");
    double loss = 0.0;
    ForwardCache cache;
    for (const auto& item : items) {
        double p = forward(model, item.features->X, *item.agg, &cache);
        loss += bce_loss(p, item.y);
    }
    return loss / static_cast<double>(items.size());
}

TrainState train(const ModelParams& init, const std::vector<TrainItem>& train_items,
                 const std::vector<TrainItem>& val_items, const TrainOptions& opt) {
    TrainState state;
    state.params = init;
    state.best_params = init;
    state.best_val_loss = mean_val_loss(init, val_items);
    state.best_epoch = 0;
    if (opt.epochs == 0) return state;
    if (train_items.empty()) throw std::invalid_argument("empty training set");

    bool found_best = false;
    AdamState adam = make_adam_state(state.params);
    AdamConfig adam_cfg;
    adam_cfg.lr = opt.lr;
    NoiseConfig noise{opt.alpha};

    const int n = static_cast<int>(train_items.size());
    const int batch = opt.batch_size > 0 ? std::min(opt.batch_size, n) : n;

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;

    ModelParams grads = zeros_like(state.params);
    ForwardCache cache;
    FeatureMatrix noised;

    for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
        RngStream noise_rng(opt.master_seed, {opt.config_key, static_cast<std::uint64_t>(opt.fold),
                                              static_cast<std::uint64_t>(epoch),
                                              static_cast<std::uint64_t>(StreamUse::noise)});
        if (batch < n) {
            RngStream shuffle_rng(opt.master_seed,
                                  {opt.config_key, static_cast<std::uint64_t>(opt.fold),
                                   static_cast<std::uint64_t>(epoch),
                                   static_cast<std::uint64_t>(StreamUse::shuffle)});
            shuffle_rng.shuffle(order);
        }

        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += batch) {
            const int count = std::min(batch, n - start);
            const double w = 1.0 / static_cast<double>(count);
            set_zero(grads);
            double batch_loss = 0.0;
            for (int b = 0; b < count; ++b) {
                const TrainItem& item = train_items[order[start + b]];
                const FeatureMatrix* features = item.features;
                if (noise.alpha != 0.0 && item.features->text_dim > 0) {
                    noised = *item.features;
                    apply_noise_to_matrix_inplace(noised, noise, noise_rng);
                    features = &noised;
                }
                forward(state.params, features->X, *item.agg, &cache);
                batch_loss += bce_loss(cache.prob, item.y) * w;
                backward_one(state.params, features->X, *item.agg, cache, item.y, w, grads);
            }
            check_gradients_finite(grads);
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch));
            }
            epoch_loss += batch_loss * count;
            adam_step(state.params, grads, adam, adam_cfg);
        }
        epoch_loss /= static_cast<double>(n);

        double val_loss = mean_val_loss(state.params, val_items);
        if (!std::isfinite(val_loss)) {
            throw std::runtime_error("non-finite validation loss at epoch " +
                                     std::to_string(epoch));
        }
        state.history.push_back(EpochStats{epoch, epoch_loss, val_loss});
        if (!found_best || val_loss < state.best_val_loss) {
            found_best = true;
            state.best_val_loss = val_loss;
            state.best_epoch = epoch;
            state.best_params = state.params;
        }
    }
    return state;
}

}  // namespace propgat
