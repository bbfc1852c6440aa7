#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "propgat/augment.hpp"
#include "propgat/data_model.hpp"
#include "propgat/features.hpp"
#include "propgat/gnn.hpp"
#include "propgat/metrics.hpp"
#include "propgat/stats.hpp"
#include "propgat/text_embed.hpp"

namespace propgat {

// ---------------------------------------------------------------------------
// Splits

struct SplitResult {
    std::vector<int> dev;
    std::vector<int> test;
};

// Stratified dev/test split. Per-class test counts are floor(n_c * fraction)
// topped up by largest fractional remainder until the overall floor(N *
// fraction) is reached; a 1,242/10,793 corpus yields exactly 1,203 test
// samples at fraction 0.10. Throws if fewer than two classes are present.
SplitResult stratified_split(const std::vector<Label>& labels, double test_fraction,
                             std::uint64_t seed);

struct Fold {
    std::vector<int> train_ids;
    std::vector<int> val_ids;
};

// Stratified k-fold partition of dev; per-fold class counts differ by at
// most one from proportional. Throws when a class has fewer than k members.
std::vector<Fold> stratified_kfold(const std::vector<int>& dev_ids,
                                   const std::vector<Label>& labels, int k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment configuration

struct TrainingHyper {
    int epochs = 60;
    double lr = 5e-3;
    int batch_size = 0;  // 0 = full batch
};

struct ExperimentConfig {
    TextConfig text;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    TrainingHyper hyper;
    int k_folds = 10;
    double test_fraction = 0.10;
    bool reverse_mp = false;

    std::string profiles_cell() const { return text.use_profiles ? "present" : "absent"; }
    std::string retweets_cell() const { return text.use_retweets ? "present" : "absent"; }
};

// Canonical computation identity: configs that compute the same thing share
// it. Without text segments the encoder and alpha are inert, so all twelve
// absent/absent grid cells collapse onto one key (and hence one RNG stream
// family), which is what makes their reported rows bit-identical.
std::string computation_key(const ExperimentConfig& cfg);
std::uint64_t config_stream_key(const ExperimentConfig& cfg);

std::string config_label(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Prepared data shared by every config of a grid (pairing requirement)

struct PreparedData {
    const Dataset* ds = nullptr;
    const StaticTable* table = nullptr;
    const ContextualStore* store = nullptr;
    std::uint64_t master_seed = 0;
    int k_folds = 10;
    double test_fraction = 0.10;
    std::vector<Label> labels;
    SplitResult split;
    std::vector<Fold> folds;
    std::vector<AggLists> agg;
    std::string fold_hash;  // partition fingerprint; identical across paired rows
};

PreparedData prepare_data(const Dataset& ds, const StaticTable* table,
                          const ContextualStore* store, std::uint64_t master_seed, int k_folds,
                          double test_fraction, bool reverse_mp = false);

// ---------------------------------------------------------------------------
// Runs and results

struct ResultRow {
    ExperimentConfig config;
    std::vector<EvalResult> fold_results;
    FoldAggregate aggregate;
    // Mean over test graphs of the across-fold-model std of the predicted
    // probability; the prediction-instability measure.
    double prediction_std = 0.0;
    std::string fold_hash;
    double wall_seconds = 0.0;  // informational only, never in deterministic outputs
};

struct FoldModel {
    ModelParams best_params;
    Normalizer normalizer;
    double best_val_loss = 0.0;
    int best_epoch = 0;
    std::vector<EpochStats> history;
};

struct ConfigRunResult {
    ResultRow row;
    std::vector<FoldModel> models;                    // only when keep_models
    std::vector<std::vector<double>> test_probs;      // [fold][test graph]
};

ConfigRunResult run_config(const PreparedData& data, const ExperimentConfig& cfg,
                           bool keep_models = false);

struct GridSpec {
    std::vector<double> alphas = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
    std::vector<Encoder> encoders = {Encoder::static_, Encoder::contextual};
    std::vector<bool> profile_options = {false, true};
    std::vector<bool> retweet_options = {false, true};
    TrainingHyper hyper;
    bool reverse_mp = false;
};

// Grid rows ordered by (encoder, profiles, retweets, alpha).
std::vector<ExperimentConfig> enumerate_grid(const GridSpec& spec, std::uint64_t seed, int k_folds,
                                             double test_fraction);

struct GridOutcome {
    std::vector<ResultRow> rows;  // deterministic order; partial on failure
    bool complete = false;
    std::string error;
};

// Runs every distinct computation of the grid (text-free cells are computed
// once and reported for each of their grid cells) with bounded parallelism.
// Output is a pure function of (dataset, spec, master seed), independent of
// the parallelism level.
GridOutcome run_grid(const PreparedData& data, const GridSpec& spec, int parallelism);

// ---------------------------------------------------------------------------
// Result files

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_results_aggregate_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_results_detail_csv(const std::vector<ResultRow>& rows, const std::string& path);

// Reconstructs rows (with recomputed aggregates) from a detail CSV.
std::vector<ResultRow> load_results_detail_csv(const std::string& path);

// Groups per-fold values of one metric by a config axis for pairwise tests.
// axis is one of "alpha", "encoder", "profiles", "retweets"; metric is one of
// "f1_macro", "roc_auc", "auc_pr".
std::vector<GroupedFoldValues> group_rows_by_axis(const std::vector<ResultRow>& rows,
                                                  const std::string& axis,
                                                  const std::string& metric);

PValueTable pairwise_table_for_rows(const std::vector<ResultRow>& rows, const std::string& axis,
                                    const std::string& metric);

void write_pvalue_csv(const std::vector<PValueTable>& tables, const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
    int n_fake = 60;
    int n_true = 540;
    int embed_dim = 16;
    int vocab_size = 400;
    int nodes_min = 6;
    int nodes_max = 36;
    int trees_min = 1;
    int trees_max = 3;
    double text_signal = 0.8;       // [0, 1]
    double structure_signal = 0.0;  // [0, 1]
    double profile_factor = 0.5;    // profile signal relative to post signal
    std::uint64_t seed = 1;

    // Class-separation constants of the planted embedding signal.
    double embed_sigma = 0.35;
    double embed_delta = 0.5;
};

struct SynthOutput {
    Dataset ds;
    StaticTable table;
    ContextualStore store;
};

// Deterministic per seed. Fake/true graphs differ in structure statistics
// proportional to structure_signal and carry class-conditional mean shifts
// in post (full strength) and profile (profile_factor) text vectors
// proportional to text_signal.
SynthOutput synth_generate(const SynthSpec& spec);

void write_synth_dataset(const SynthOutput& out, const SynthSpec& spec, const std::string& dir);

SynthSpec synth_spec_from_json_file(const std::string& path);
void synth_spec_to_json_file(const SynthSpec& spec, const std::string& path);

// ---------------------------------------------------------------------------
// Dataset directory (graphs.jsonl + optional embedding sources)

struct DataBundle {
    Dataset ds;
    std::optional<StaticTable> table;
    std::optional<ContextualStore> store;
};

DataBundle load_data_dir(const std::string& dir);

// ---------------------------------------------------------------------------
// Train job (single config) and checkpoints

struct TrainJobSpec {
    std::string dataset_dir;
    ExperimentConfig config;
    std::string out_dir;
};

TrainJobSpec train_job_from_json_file(const std::string& path);

struct Checkpoint {
    int version = 1;
    ExperimentConfig config;
    int fold = 0;
    int text_dim = 0;
    ModelParams params;
    Normalizer normalizer;
    double best_val_loss = 0.0;
    int best_epoch = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

// ---------------------------------------------------------------------------
// Report

struct ReportSummary {
    bool has_rows = false;
    std::string best_config;
    double best_f1 = 0.0;
    bool has_no_text = false;
    double no_text_f1 = 0.0;
    double gain_vs_no_text_pct = 0.0;  // 100 * (best/no_text - 1)
    bool has_both_encoders = false;
    double best_static_f1 = 0.0;
    double best_contextual_f1 = 0.0;
    double gain_contextual_vs_static_pct = 0.0;
    std::string text() const;
};

ReportSummary summarize_results(const std::vector<ResultRow>& rows);

// Emits results.csv, pvalues.csv (omitted with a warning when tables are
// empty), figure_data.csv and summary.txt under out_dir. Returns the paths
// written.
std::vector<std::string> write_report(const std::vector<ResultRow>& rows,
                                      const std::vector<PValueTable>& tables,
                                      const std::string& out_dir);

}  // namespace propgat
