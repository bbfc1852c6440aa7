#include <stdexcept>

#include <json.hpp>

#include "propgat/harness.hpp"
#include "propgat/io_util.hpp"

namespace propgat {

using nlohmann::json;

namespace {

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["encoder"] = to_string(cfg.text.encoder);
    j["use_profiles"] = cfg.text.use_profiles;
    j["use_retweets"] = cfg.text.use_retweets;
    j["alpha"] = cfg.alpha;
    j["seed"] = cfg.seed;
    j["epochs"] = cfg.hyper.epochs;
    j["lr"] = cfg.hyper.lr;
    j["batch_size"] = cfg.hyper.batch_size;
    j["k_folds"] = cfg.k_folds;
    j["test_fraction"] = cfg.test_fraction;
    j["reverse_mp"] = cfg.reverse_mp;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.text.encoder = encoder_from_string(j.value("encoder", std::string("static")));
    cfg.text.use_profiles = j.value("use_profiles", false);
    cfg.text.use_retweets = j.value("use_retweets", false);
    cfg.alpha = j.value("alpha", 0.0);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.hyper.epochs = j.value("epochs", 60);
    cfg.hyper.lr = j.value("lr", 5e-3);
    cfg.hyper.batch_size = j.value("batch_size", 0);
    cfg.k_folds = j.value("k_folds", 10);
    cfg.test_fraction = j.value("test_fraction", 0.10);
    cfg.reverse_mp = j.value("reverse_mp", false);
    if (cfg.alpha < 0.0) throw std::runtime_error("alpha must be non-negative");
    return cfg;
}

json tensor_array(const double* data, int n) {
    json arr = json::array();
    for (int i = 0; i < n; ++i) arr.push_back(data[i]);
    return arr;
}

}  // namespace

TrainJobSpec train_job_from_json_file(const std::string& path) {
    json j = json::parse(read_file(path));
    TrainJobSpec job;
    job.dataset_dir = j.at("dataset_dir").get<std::string>();
    job.out_dir = j.value("out_dir", std::string("train_out"));
    job.config = config_from_json(j);
    return job;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json j;
    j["format"] = "propgat-checkpoint";
    j["version"] = ckpt.version;
    j["config"] = config_to_json(ckpt.config);
    j["fold"] = ckpt.fold;
    j["text_dim"] = ckpt.text_dim;
    j["input_dim"] = ckpt.params.input_dim();
    j["best_val_loss"] = ckpt.best_val_loss;
    j["best_epoch"] = ckpt.best_epoch;
    j["normalizer"]["mean"] = tensor_array(ckpt.normalizer.mean.data(),
                                           static_cast<int>(ckpt.normalizer.mean.size()));
    j["normalizer"]["std"] = tensor_array(ckpt.normalizer.std.data(),
                                          static_cast<int>(ckpt.normalizer.std.size()));
    json tensors;
    for_each_tensor(ckpt.params, [&](const std::string& name, const double* data, int n) {
        tensors[name] = tensor_array(data, n);
    });
    j["tensors"] = std::move(tensors);
    write_file(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    json j = json::parse(read_file(path));
    if (j.value("format", std::string()) != "propgat-checkpoint") {
        throw std::runtime_error(path + ": not a checkpoint file");
    }
    Checkpoint ckpt;
    ckpt.version = j.at("version").get<int>();
    ckpt.config = config_from_json(j.at("config"));
    ckpt.fold = j.value("fold", 0);
    ckpt.text_dim = j.value("text_dim", 0);
    ckpt.best_val_loss = j.value("best_val_loss", 0.0);
    ckpt.best_epoch = j.value("best_epoch", 0);

    auto mean = j.at("normalizer").at("mean").get<std::vector<double>>();
    auto stdv = j.at("normalizer").at("std").get<std::vector<double>>();
    ckpt.normalizer.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), mean.size());
    ckpt.normalizer.std = Eigen::Map<Eigen::VectorXd>(stdv.data(), stdv.size());

    ckpt.params = make_model(j.at("input_dim").get<int>());
    const json& tensors = j.at("tensors");
    for_each_tensor(ckpt.params, [&](const std::string& name, double* data, int n) {
        auto vals = tensors.at(name).get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != n) {
            throw std::runtime_error(path + ": tensor " + name + " has wrong size");
        }
        std::copy(vals.begin(), vals.end(), data);
    });
    return ckpt;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + "," + fmt_double_exact(e.train_loss) + "," +
               fmt_double_exact(e.val_loss) + "\n";
    }
    write_file(path, out);
}

}  // namespace propgat
