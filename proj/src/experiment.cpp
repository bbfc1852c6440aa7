#include <atomic>
#include <cmath>
#include <chrono>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "propgat/harness.hpp"
#include "propgat/io_util.hpp"
#include "propgat/rng.hpp"

namespace propgat {

std::string computation_key(const ExperimentConfig& cfg) {
    if (!cfg.text.uses_text()) {
        // Encoder and alpha are inert without text columns; fold every
        // text-free cell onto one computation.
        return std::string("enc=none|prof=0|rt=0|alpha=0|rev=") + (cfg.reverse_mp ? "1" : "0");
    }
    std::string key = "enc=";
    key += to_string(cfg.text.encoder);
    key += "|prof=";
    key += cfg.text.use_profiles ? '1' : '0';
    key += "|rt=";
    key += cfg.text.use_retweets ? '1' : '0';
    key += "|alpha=";
    key += fmt_double(cfg.alpha, "%g");
    key += "|rev=";
    key += cfg.reverse_mp ? '1' : '0';
    return key;
}

std::uint64_t config_stream_key(const ExperimentConfig& cfg) {
    return hash_key(computation_key(cfg));
}

std::string config_label(const ExperimentConfig& cfg) {
    std::string s = "encoder=";
    s += to_string(cfg.text.encoder);
    s += " profiles=" + cfg.profiles_cell();
    s += " retweets=" + cfg.retweets_cell();
    s += " alpha=" + fmt_double(cfg.alpha, "%g");
    return s;
}

PreparedData prepare_data(const Dataset& ds, const StaticTable* table,
                          const ContextualStore* store, std::uint64_t master_seed, int k_folds,
                          double test_fraction, bool reverse_mp) {
    PreparedData data;
    data.ds = &ds;
    data.table = table;
    data.store = store;
    data.master_seed = master_seed;
    data.k_folds = k_folds;
    data.test_fraction = test_fraction;
    data.labels.reserve(ds.graphs.size());
    for (const auto& g : ds.graphs) data.labels.push_back(g.label);
    data.split = stratified_split(data.labels, test_fraction, master_seed);
    data.folds = stratified_kfold(data.split.dev, data.labels, k_folds, master_seed);
    data.agg.reserve(ds.graphs.size());
    for (const auto& g : ds.graphs) data.agg.push_back(aggregation_lists(g, reverse_mp));

    std::string desc;
    for (const auto& f : data.folds) {
        desc += "v:";
        for (int id : f.val_ids) desc += std::to_string(id) + ",";
        desc += "|";
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_key(desc)));
    data.fold_hash = buf;
    return data;
}

ConfigRunResult run_config(const PreparedData& data, const ExperimentConfig& cfg,
                           bool keep_models) {
    auto t0 = std::chrono::steady_clock::now();
    const Dataset& ds = *data.ds;
    const std::uint64_t cfg_key = config_stream_key(cfg);

    // Raw (un-normalized) features for every graph this run touches.
    std::vector<FeatureMatrix> raw(ds.graphs.size());
    std::vector<bool> needed(ds.graphs.size(), false);
    for (int id : data.split.dev) needed[id] = true;
    for (int id : data.split.test) needed[id] = true;
    int d_in = -1;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        if (!needed[i]) continue;
        raw[i] = assemble_features(ds.graphs[i], cfg.text, data.table, data.store);
        if (d_in < 0) d_in = static_cast<int>(raw[i].X.cols());
    }
    if (d_in < 0) throw std::runtime_error("no graphs selected by the split");

    ConfigRunResult result;
    result.row.config = cfg;
    result.row.fold_hash = data.fold_hash;

    const int n_test = static_cast<int>(data.split.test.size());
    result.test_probs.assign(data.folds.size(), std::vector<double>(n_test, 0.0));

    for (std::size_t f = 0; f < data.folds.size(); ++f) {
        const Fold& fold = data.folds[f];

        std::vector<const FeatureMatrix*> train_raw;
        train_raw.reserve(fold.train_ids.size());
        for (int id : fold.train_ids) train_raw.push_back(&raw[id]);
        Normalizer nrm = fit_normalizer(train_raw);

        std::unordered_map<int, FeatureMatrix> norm;
        auto normalized = [&](int id) -> const FeatureMatrix* {
            auto it = norm.find(id);
            if (it == norm.end()) it = norm.emplace(id, apply_normalizer(nrm, raw[id])).first;
            return &it->second;
        };

        RngStream oversample_rng(data.master_seed,
                                 {cfg_key, static_cast<std::uint64_t>(f), 0,
                                  static_cast<std::uint64_t>(StreamUse::oversample)});
        std::vector<Label> train_labels;
        train_labels.reserve(fold.train_ids.size());
        for (int id : fold.train_ids) train_labels.push_back(data.labels[id]);
        std::vector<int> train_instances = oversample(fold.train_ids, train_labels, oversample_rng);

        std::vector<TrainItem> train_items;
        train_items.reserve(train_instances.size());
        for (int id : train_instances) {
            train_items.push_back(
                TrainItem{normalized(id), &data.agg[id], data.labels[id] == Label::fake ? 1.0 : 0.0});
        }
        std::vector<TrainItem> val_items;
        val_items.reserve(fold.val_ids.size());
        for (int id : fold.val_ids) {
            val_items.push_back(
                TrainItem{normalized(id), &data.agg[id], data.labels[id] == Label::fake ? 1.0 : 0.0});
        }

        ModelParams model = make_model(d_in);
        RngStream init_rng(data.master_seed, {cfg_key, static_cast<std::uint64_t>(f), 0,
                                              static_cast<std::uint64_t>(StreamUse::init)});
        glorot_init(model, init_rng);

        TrainOptions opt;
        opt.epochs = cfg.hyper.epochs;
        opt.lr = cfg.hyper.lr;
        opt.batch_size = cfg.hyper.batch_size;
        opt.alpha = cfg.alpha;
        opt.master_seed = data.master_seed;
        opt.config_key = cfg_key;
        opt.fold = static_cast<int>(f);
        TrainState ts = train(model, train_items, val_items, opt);

        std::vector<int> val_labels;
        std::vector<double> val_probs;
        for (int id : fold.val_ids) {
            val_labels.push_back(data.labels[id] == Label::fake ? 1 : 0);
            val_probs.push_back(forward(ts.best_params, normalized(id)->X, data.agg[id]));
        }
        result.row.fold_results.push_back(evaluate(val_labels, val_probs));

        for (int t = 0; t < n_test; ++t) {
            int id = data.split.test[t];
            result.test_probs[f][t] = forward(ts.best_params, normalized(id)->X, data.agg[id]);
        }

        if (keep_models) {
            FoldModel fm;
            fm.best_params = ts.best_params;
            fm.normalizer = nrm;
            fm.best_val_loss = ts.best_val_loss;
            fm.best_epoch = ts.best_epoch;
            fm.history = ts.history;
            result.models.push_back(std::move(fm));
        }
    }

    result.row.aggregate = aggregate_folds(result.row.fold_results);

    // Prediction instability: per test graph, sample std of the probability
    // across the fold models, averaged over the test set.
    if (n_test > 0 && data.folds.size() >= 2) {
        double acc = 0.0;
        const double k = static_cast<double>(data.folds.size());
        for (int t = 0; t < n_test; ++t) {
            double mean = 0.0;
            for (std::size_t f = 0; f < data.folds.size(); ++f) mean += result.test_probs[f][t];
            mean /= k;
            double ss = 0.0;
            for (std::size_t f = 0; f < data.folds.size(); ++f) {
                double dv = result.test_probs[f][t] - mean;
                ss += dv * dv;
            }
            acc += std::sqrt(ss / (k - 1.0));
        }
        result.row.prediction_std = acc / static_cast<double>(n_test);
    }

    result.row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::vector<ExperimentConfig> enumerate_grid(const GridSpec& spec, std::uint64_t seed, int k_folds,
                                             double test_fraction) {
    std::vector<ExperimentConfig> out;
    for (Encoder enc : spec.encoders) {
        for (bool prof : spec.profile_options) {
            for (bool rt : spec.retweet_options) {
                for (double alpha : spec.alphas) {
                    ExperimentConfig cfg;
                    cfg.text.encoder = enc;
                    cfg.text.use_profiles = prof;
                    cfg.text.use_retweets = rt;
                    cfg.alpha = alpha;
                    cfg.seed = seed;
                    cfg.hyper = spec.hyper;
                    cfg.k_folds = k_folds;
                    cfg.test_fraction = test_fraction;
                    cfg.reverse_mp = spec.reverse_mp;
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

GridOutcome run_grid(const PreparedData& data, const GridSpec& spec, int parallelism) {
    GridOutcome outcome;
    std::vector<ExperimentConfig> configs =
        enumerate_grid(spec, data.master_seed, data.k_folds, data.test_fraction);

    // Distinct computations, keyed canonically; text-free cells share one.
    std::vector<std::string> comp_keys;
    std::vector<ExperimentConfig> comp_configs;
    std::unordered_map<std::string, int> comp_index;
    std::vector<int> config_to_comp(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        std::string key = computation_key(configs[i]);
        auto it = comp_index.find(key);
        if (it == comp_index.end()) {
            it = comp_index.emplace(key, static_cast<int>(comp_keys.size())).first;
            comp_keys.push_back(key);
            comp_configs.push_back(configs[i]);
        }
        config_to_comp[i] = it->second;
    }

    std::vector<std::optional<ConfigRunResult>> results(comp_configs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string error;

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= comp_configs.size() || failed.load()) break;
            try {
                results[i] = run_config(data, comp_configs[i], false);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) {
                    error = "config '" + config_label(comp_configs[i]) + "' failed: " + e.what();
                }
                break;
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(parallelism, static_cast<int>(comp_configs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& comp = results[config_to_comp[i]];
        if (!comp.has_value()) continue;
        ResultRow row = comp->row;
        row.config = configs[i];  // report under the cell's own config fields
        outcome.rows.push_back(std::move(row));
    }
    outcome.complete = !failed.load();
    outcome.error = error;
    return outcome;
}

// ---------------------------------------------------------------------------
// CSV emission

namespace {

const char* kResultsHeader = "encoder,profiles,retweets,alpha,f1_macro,roc_auc,auc_pr";

std::vector<std::string> config_cells(const ExperimentConfig& cfg) {
    return {to_string(cfg.text.encoder), cfg.profiles_cell(), cfg.retweets_cell(),
            fmt_double(cfg.alpha, "%g")};
}

}  // namespace

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const auto& r : rows) {
        auto cells = config_cells(r.config);
        cells.push_back(r.aggregate.f1_cell());
        cells.push_back(r.aggregate.roc_cell());
        cells.push_back(r.aggregate.pr_cell());
        out += join_csv(cells);
        out += '\n';
    }
    write_file(path, out);
}

void write_results_aggregate_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::string out =
        "encoder,profiles,retweets,alpha,seed,fold_hash,f1_macro_mean,f1_macro_std,"
        "roc_auc_mean,roc_auc_std,auc_pr_mean,auc_pr_std,prediction_std\n";
    for (const auto& r : rows) {
        auto cells = config_cells(r.config);
        cells.push_back(std::to_string(r.config.seed));
        cells.push_back(r.fold_hash);
        cells.push_back(fmt_double_exact(r.aggregate.f1_mean));
        cells.push_back(fmt_double_exact(r.aggregate.f1_std));
        cells.push_back(fmt_double_exact(r.aggregate.roc_mean));
        cells.push_back(fmt_double_exact(r.aggregate.roc_std));
        cells.push_back(fmt_double_exact(r.aggregate.pr_mean));
        cells.push_back(fmt_double_exact(r.aggregate.pr_std));
        cells.push_back(fmt_double_exact(r.prediction_std));
        out += join_csv(cells);
        out += '\n';
    }
    write_file(path, out);
}

void write_results_detail_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::string out = "encoder,profiles,retweets,alpha,seed,fold,f1_macro,roc_auc,auc_pr\n";
    for (const auto& r : rows) {
        for (std::size_t f = 0; f < r.fold_results.size(); ++f) {
            auto cells = config_cells(r.config);
            cells.push_back(std::to_string(r.config.seed));
            cells.push_back(std::to_string(f));
            cells.push_back(fmt_double_exact(r.fold_results[f].f1_macro));
            cells.push_back(fmt_double_exact(r.fold_results[f].roc_auc));
            cells.push_back(fmt_double_exact(r.fold_results[f].auc_pr));
            out += join_csv(cells);
            out += '\n';
        }
    }
    write_file(path, out);
}

std::vector<ResultRow> load_results_detail_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty results file: " + path);
    std::vector<ResultRow> rows;
    std::map<std::string, std::size_t> row_index;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cells = split_csv(lines[i]);
        if (cells.size() != 9) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected 9 columns");
        }
        std::string key = cells[0] + "|" + cells[1] + "|" + cells[2] + "|" + cells[3];
        auto it = row_index.find(key);
        if (it == row_index.end()) {
            ResultRow row;
            row.config.text.encoder = encoder_from_string(cells[0]);
            row.config.text.use_profiles = cells[1] == "present";
            row.config.text.use_retweets = cells[2] == "present";
            row.config.alpha = std::stod(cells[3]);
            row.config.seed = std::stoull(cells[4]);
            it = row_index.emplace(key, rows.size()).first;
            rows.push_back(row);
        }
        EvalResult er;
        er.f1_macro = std::stod(cells[6]);
        er.roc_auc = std::stod(cells[7]);
        er.auc_pr = std::stod(cells[8]);
        rows[it->second].fold_results.push_back(er);
    }
    for (auto& row : rows) row.aggregate = aggregate_folds(row.fold_results);
    return rows;
}

namespace {

double metric_of(const EvalResult& r, const std::string& metric) {
    if (metric == "f1_macro") return r.f1_macro;
    if (metric == "roc_auc") return r.roc_auc;
    if (metric == "auc_pr") return r.auc_pr;
    throw std::invalid_argument("unknown metric: " + metric);
}

std::string axis_value_of(const ExperimentConfig& cfg, const std::string& axis) {
    if (axis == "alpha") return fmt_double(cfg.alpha, "%g");
    if (axis == "encoder") return to_string(cfg.text.encoder);
    if (axis == "profiles") return cfg.profiles_cell();
    if (axis == "retweets") return cfg.retweets_cell();
    throw std::invalid_argument("unknown axis: " + axis);
}

std::string pairing_key_of(const ExperimentConfig& cfg, const std::string& axis) {
    std::string key;
    if (axis != "encoder") key += std::string("enc=") + to_string(cfg.text.encoder) + "|";
    if (axis != "profiles") key += "prof=" + cfg.profiles_cell() + "|";
    if (axis != "retweets") key += "rt=" + cfg.retweets_cell() + "|";
    if (axis != "alpha") key += "alpha=" + fmt_double(cfg.alpha, "%g") + "|";
    return key;
}

}  // namespace

std::vector<GroupedFoldValues> group_rows_by_axis(const std::vector<ResultRow>& rows,
                                                  const std::string& axis,
                                                  const std::string& metric) {
    std::vector<GroupedFoldValues> groups;
    for (const auto& row : rows) {
        GroupedFoldValues g;
        g.axis_value = axis_value_of(row.config, axis);
        g.pairing_key = pairing_key_of(row.config, axis);
        for (const auto& fr : row.fold_results) g.folds.push_back(metric_of(fr, metric));
        groups.push_back(std::move(g));
    }
    return groups;
}

PValueTable pairwise_table_for_rows(const std::vector<ResultRow>& rows, const std::string& axis,
                                    const std::string& metric) {
    return pairwise_table(group_rows_by_axis(rows, axis, metric), axis, metric);
}

void write_pvalue_csv(const std::vector<PValueTable>& tables, const std::string& path) {
    if (tables.empty()) throw std::invalid_argument("no p-value tables to write");
    // Tables are per metric over the same comparisons; one row per
    // comparison with raw, Holm-adjusted and significance columns per metric.
    std::string header = "comparison";
    for (const auto& t : tables) header += "," + t.metric + "_p";
    for (const auto& t : tables) header += "," + t.metric + "_p_holm";
    for (const auto& t : tables) header += "," + t.metric + "_significant";
    std::string out = header + "\n";
    const std::size_t n = tables[0].comparisons.size();
    for (const auto& t : tables) {
        if (t.comparisons.size() != n) throw std::invalid_argument("table row count mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> cells = {tables[0].comparisons[i].label};
        for (const auto& t : tables) cells.push_back(fmt_double(t.comparisons[i].p_raw, "%.6g"));
        for (const auto& t : tables) cells.push_back(fmt_double(t.comparisons[i].p_holm, "%.6g"));
        for (const auto& t : tables) cells.push_back(t.comparisons[i].significant ? "1" : "0");
        out += join_csv(cells);
        out += '\n';
    }
    write_file(path, out);
}

}  // namespace propgat
