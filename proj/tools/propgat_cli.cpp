#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "propgat/harness.hpp"
#include "propgat/io_util.hpp"

using namespace propgat;

namespace {

int cmd_ingest(const std::string& path) {
    Dataset ds = load_dataset(path);
    DatasetStats stats = dataset_stats(ds);
    std::cout << stats.summary();
    return 0;
}

int cmd_synth(const std::string& spec_path, std::uint64_t seed, bool seed_given,
              const std::string& out_dir) {
    SynthSpec spec = spec_path.empty() ? SynthSpec{} : synth_spec_from_json_file(spec_path);
    if (seed_given) spec.seed = seed;
    SynthOutput out = synth_generate(spec);
    write_synth_dataset(out, spec, out_dir);
    DatasetStats stats = dataset_stats(out.ds);
    std::cout << "wrote synthetic dataset to " << out_dir << "\n" << stats.summary();
    return 0;
}

const StaticTable* table_or_null(const DataBundle& bundle) {
    return bundle.table ? &*bundle.table : nullptr;
}
const ContextualStore* store_or_null(const DataBundle& bundle) {
    return bundle.store ? &*bundle.store : nullptr;
}

int cmd_train(const std::string& config_path) {
    TrainJobSpec job = train_job_from_json_file(config_path);
    DataBundle bundle = load_data_dir(job.dataset_dir);
    PreparedData data =
        prepare_data(bundle.ds, table_or_null(bundle), store_or_null(bundle), job.config.seed,
                     job.config.k_folds, job.config.test_fraction, job.config.reverse_mp);
    std::cout << "training " << config_label(job.config) << " over " << job.config.k_folds
              << " folds\n";
    ConfigRunResult result = run_config(data, job.config, /*keep_models=*/true);

    std::filesystem::create_directories(job.out_dir);
    write_results_csv({result.row}, job.out_dir + "/results.csv");
    write_results_aggregate_csv({result.row}, job.out_dir + "/results_aggregate.csv");
    write_results_detail_csv({result.row}, job.out_dir + "/results_detail.csv");
    for (std::size_t f = 0; f < result.models.size(); ++f) {
        const FoldModel& fm = result.models[f];
        Checkpoint ckpt;
        ckpt.config = job.config;
        ckpt.fold = static_cast<int>(f);
        ckpt.text_dim = job.config.text.uses_text()
                            ? text_dim(job.config.text, table_or_null(bundle), store_or_null(bundle))
                            : 0;
        ckpt.params = fm.best_params;
        ckpt.normalizer = fm.normalizer;
        ckpt.best_val_loss = fm.best_val_loss;
        ckpt.best_epoch = fm.best_epoch;
        save_checkpoint(ckpt, job.out_dir + "/checkpoint_fold" + std::to_string(f) + ".json");
        write_history_csv(fm.history, job.out_dir + "/history_fold" + std::to_string(f) + ".csv");
    }
    std::cout << "fold-mean F1 Macro: " << fmt_percent1(result.row.aggregate.f1_mean)
              << "  ROC AUC: " << fmt_percent1(result.row.aggregate.roc_mean)
              << "  AUC PR: " << fmt_percent1(result.row.aggregate.pr_mean) << "\n"
              << "wrote results and checkpoints to " << job.out_dir << "\n";
    return 0;
}

int cmd_grid(const std::string& dataset_dir, const std::string& out_dir, int parallel,
             std::uint64_t seed, int epochs, double lr, int batch_size, int k_folds,
             double test_fraction, const std::vector<double>& alphas, bool reverse_mp) {
    DataBundle bundle = load_data_dir(dataset_dir);
    GridSpec spec;
    if (!alphas.empty()) spec.alphas = alphas;
    spec.hyper.epochs = epochs;
    spec.hyper.lr = lr;
    spec.hyper.batch_size = batch_size;
    spec.reverse_mp = reverse_mp;
    if (bundle.table && !bundle.store) spec.encoders = {Encoder::static_};
    if (bundle.store && !bundle.table) spec.encoders = {Encoder::contextual};

    PreparedData data = prepare_data(bundle.ds, table_or_null(bundle), store_or_null(bundle), seed,
                                     k_folds, test_fraction, reverse_mp);
    std::cout << "grid: " << spec.encoders.size() * 4 * spec.alphas.size() << " configs, "
              << k_folds << " folds, seed " << seed << "\n";
    GridOutcome outcome = run_grid(data, spec, parallel);

    std::filesystem::create_directories(out_dir);
    const char* suffix = outcome.complete ? "" : ".partial";
    write_results_csv(outcome.rows, out_dir + "/results.csv" + suffix);
    write_results_aggregate_csv(outcome.rows, out_dir + "/results_aggregate.csv" + suffix);
    write_results_detail_csv(outcome.rows, out_dir + "/results_detail.csv" + suffix);
    if (!outcome.complete) {
        std::cerr << "grid aborted: " << outcome.error << "\n"
                  << "partial results (" << outcome.rows.size() << " rows) kept in " << out_dir
                  << "\n";
        return 1;
    }
    double wall = 0.0;
    for (const auto& r : outcome.rows) wall += r.wall_seconds;
    std::cout << "wrote " << outcome.rows.size() << " result rows to " << out_dir
              << " (trained " << wall << "s of per-config work)\n";
    return 0;
}

int cmd_stats(const std::string& results_dir, const std::string& axis) {
    std::vector<ResultRow> rows = load_results_detail_csv(results_dir + "/results_detail.csv");
    std::vector<PValueTable> tables;
    for (const char* metric : {"f1_macro", "roc_auc", "auc_pr"}) {
        tables.push_back(pairwise_table_for_rows(rows, axis, metric));
    }
    std::string path = results_dir + "/pvalues_" + axis + ".csv";
    write_pvalue_csv(tables, path);
    std::cout << "wrote " << path << "\n";
    for (const auto& cmp : tables[0].comparisons) {
        std::cout << cmp.label << ": f1 p=" << fmt_double(cmp.p_raw, "%.4g")
                  << (cmp.degenerate ? " (degenerate)" : "") << "\n";
    }
    return 0;
}

int cmd_report(const std::string& results_dir, const std::string& out_dir) {
    std::vector<ResultRow> rows = load_results_detail_csv(results_dir + "/results_detail.csv");
    std::vector<PValueTable> tables;
    bool multiple_alphas = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].config.alpha != rows[0].config.alpha) multiple_alphas = true;
    }
    if (multiple_alphas) {
        for (const char* metric : {"f1_macro", "roc_auc", "auc_pr"}) {
            tables.push_back(pairwise_table_for_rows(rows, "alpha", metric));
        }
    }
    auto written = write_report(rows, tables, out_dir);
    for (const auto& p : written) std::cout << "wrote " << p << "\n";
    std::cout << summarize_results(rows).text();
    return 0;
}

int cmd_evaluate_test(const std::string& checkpoint_path, const std::string& dataset_dir) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    DataBundle bundle = load_data_dir(dataset_dir);
    PreparedData data =
        prepare_data(bundle.ds, table_or_null(bundle), store_or_null(bundle), ckpt.config.seed,
                     ckpt.config.k_folds, ckpt.config.test_fraction, ckpt.config.reverse_mp);
    std::vector<int> labels;
    std::vector<double> probs;
    for (int id : data.split.test) {
        FeatureMatrix raw =
            assemble_features(bundle.ds.graphs[id], ckpt.config.text, table_or_null(bundle),
                              store_or_null(bundle));
        FeatureMatrix normd = apply_normalizer(ckpt.normalizer, raw);
        labels.push_back(data.labels[id] == Label::fake ? 1 : 0);
        probs.push_back(forward(ckpt.params, normd.X, data.agg[id]));
    }
    if (labels.empty()) {
        std::cerr << "test split is empty (test_fraction "
                  << ckpt.config.test_fraction << ")\n";
        return 1;
    }
    EvalResult r = evaluate(labels, probs);
    std::cout << "checkpoint: " << checkpoint_path << " (fold " << ckpt.fold << ", "
              << config_label(ckpt.config) << ")\n"
              << "test set: " << labels.size() << " graphs (" << r.n_pos << " fake, " << r.n_neg
              << " true)\n"
              << "F1 Macro: " << fmt_double(r.f1_macro, "%.4f")
              << "  ROC AUC: " << fmt_double(r.roc_auc, "%.4f")
              << "  AUC PR: " << fmt_double(r.auc_pr, "%.4f") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"propagation-graph disinformation detection experiments"};
    app.require_subcommand(1);

    std::string ingest_path;
    auto* ingest = app.add_subcommand("ingest", "validate a graph dataset and print stats");
    ingest->add_option("graphs", ingest_path, "graphs.jsonl file")->required();

    std::string synth_spec_path, synth_out;
    std::uint64_t synth_seed = 1;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--spec", synth_spec_path, "synthesis spec JSON (defaults when omitted)");
    auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "override the spec seed");
    synth->add_option("--out", synth_out, "output directory")->required();

    std::string train_config;
    auto* train = app.add_subcommand("train", "run one experiment config");
    train->add_option("--config", train_config, "train job JSON")->required();

    std::string grid_dataset, grid_out;
    int grid_parallel = 1, grid_epochs = 60, grid_batch = 0, grid_k = 10;
    std::uint64_t grid_seed = 42;
    double grid_lr = 5e-3, grid_test_fraction = 0.10;
    std::vector<double> grid_alphas;
    bool grid_reverse = false;
    auto* grid = app.add_subcommand("grid", "run the experiment grid");
    grid->add_option("--dataset", grid_dataset, "dataset directory")->required();
    grid->add_option("--out", grid_out, "output directory")->required();
    grid->add_option("--parallel", grid_parallel, "worker threads");
    grid->add_option("--seed", grid_seed, "master seed");
    grid->add_option("--epochs", grid_epochs, "training epochs per fold");
    grid->add_option("--lr", grid_lr, "learning rate");
    grid->add_option("--batch", grid_batch, "mini-batch size (0 = full batch)");
    grid->add_option("--folds", grid_k, "cross-validation folds");
    grid->add_option("--test-fraction", grid_test_fraction, "held-out test fraction");
    grid->add_option("--alphas", grid_alphas, "restrict the noise amplitude grid");
    grid->add_flag("--reverse-mp", grid_reverse, "aggregate along reversed diffusion edges");

    std::string stats_dir, stats_axis = "alpha";
    auto* stats = app.add_subcommand("stats", "pairwise Wilcoxon-Holm tables from grid results");
    stats->add_option("--results", stats_dir, "grid results directory")->required();
    stats->add_option("--axis", stats_axis, "alpha|encoder|profiles|retweets")
        ->check(CLI::IsMember({"alpha", "encoder", "profiles", "retweets"}));

    std::string report_results, report_out;
    auto* report = app.add_subcommand("report", "emit result tables, figure data and summary");
    report->add_option("--results", report_results, "grid results directory")->required();
    report->add_option("--out", report_out, "output directory")->required();

    std::string eval_ckpt, eval_dataset;
    auto* evaluate_test =
        app.add_subcommand("evaluate-test", "score a checkpoint on the held-out test split");
    evaluate_test->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
    evaluate_test->add_option("--dataset", eval_dataset, "dataset directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_path);
        if (synth->parsed()) {
            return cmd_synth(synth_spec_path, synth_seed, synth_seed_opt->count() > 0, synth_out);
        }
        if (train->parsed()) return cmd_train(train_config);
        if (grid->parsed()) {
            return cmd_grid(grid_dataset, grid_out, grid_parallel, grid_seed, grid_epochs, grid_lr,
                            grid_batch, grid_k, grid_test_fraction, grid_alphas, grid_reverse);
        }
        if (stats->parsed()) return cmd_stats(stats_dir, stats_axis);
        if (report->parsed()) return cmd_report(report_results, report_out);
        if (evaluate_test->parsed()) return cmd_evaluate_test(eval_ckpt, eval_dataset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
