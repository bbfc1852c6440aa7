#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "propgat/harness.hpp"

namespace py = pybind11;
using namespace propgat;

namespace {

TextConfig make_text_config(const std::string& encoder, bool use_profiles, bool use_retweets) {
    TextConfig cfg;
    cfg.encoder = encoder_from_string(encoder);
    cfg.use_profiles = use_profiles;
    cfg.use_retweets = use_retweets;
    return cfg;
}

ExperimentConfig make_experiment_config(const std::string& encoder, bool use_profiles,
                                        bool use_retweets, double alpha, std::uint64_t seed,
                                        int epochs, double lr, int batch_size, int k_folds,
                                        double test_fraction) {
    ExperimentConfig cfg;
    cfg.text = make_text_config(encoder, use_profiles, use_retweets);
    cfg.alpha = alpha;
    cfg.seed = seed;
    cfg.hyper.epochs = epochs;
    cfg.hyper.lr = lr;
    cfg.hyper.batch_size = batch_size;
    cfg.k_folds = k_folds;
    cfg.test_fraction = test_fraction;
    return cfg;
}

std::vector<Label> labels_from_ints(const std::vector<int>& ys) {
    std::vector<Label> labels;
    labels.reserve(ys.size());
    for (int y : ys) labels.push_back(y ? Label::fake : Label::real);
    return labels;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "propagation-graph disinformation detection core";

    // --- text ---
    m.def("tokenize", &tokenize, py::arg("text"));

    py::class_<StaticTable>(m, "StaticTable")
        .def_readonly("dimension", &StaticTable::dimension)
        .def("__len__", [](const StaticTable& t) { return t.entries.size(); })
        .def("vector", [](const StaticTable& t, const std::string& word) -> py::object {
            auto it = t.entries.find(word);
            if (it == t.entries.end()) return py::none();
            return py::cast(it->second);
        })
        .def("embed", [](const StaticTable& t, const std::string& text) {
            return embed_text_static(t, text);
        });
    m.def("load_static_table", &load_static_table, py::arg("path"));

    py::class_<ContextualStore>(m, "ContextualStore")
        .def_readonly("dimension", &ContextualStore::dimension)
        .def("__len__", [](const ContextualStore& s) { return s.entries.size(); })
        .def("vector",
             [](const ContextualStore& s, const std::string& node_id,
                const std::string& source) -> py::object {
                 const Eigen::VectorXd* v = s.find(node_id, text_source_from_string(source));
                 if (!v) return py::none();
                 return py::cast(*v);
             });
    m.def("load_contextual_store", &load_contextual_store, py::arg("path"));

    // --- data ---
    py::class_<PropagationGraph>(m, "PropagationGraph")
        .def_property_readonly("graph_id",
                               [](const PropagationGraph& g) { return g.graph_id; })
        .def_property_readonly("label",
                               [](const PropagationGraph& g) { return std::string(to_string(g.label)); })
        .def_property_readonly("num_nodes", &PropagationGraph::node_count)
        .def_property_readonly("edges", [](const PropagationGraph& g) { return g.edges; });

    py::class_<Dataset>(m, "Dataset")
        .def("__len__", [](const Dataset& ds) { return ds.graphs.size(); })
        .def("graph", [](const Dataset& ds, std::size_t i) -> const PropagationGraph& {
            return ds.graphs.at(i);
        }, py::return_value_policy::reference_internal)
        .def("labels", [](const Dataset& ds) {
            std::vector<int> ys;
            for (const auto& g : ds.graphs) ys.push_back(g.label == Label::fake ? 1 : 0);
            return ys;
        });
    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("validate_graph", &validate_graph, py::arg("graph"));
    m.def("dataset_stats", [](const Dataset& ds) {
        DatasetStats s = dataset_stats(ds);
        py::dict d;
        d["n_fake"] = s.n_fake;
        d["n_true"] = s.n_true;
        d["imbalance_ratio"] = s.imbalance_ratio;
        d["degenerate_class"] = s.degenerate_class;
        d["mean_nodes"] = s.mean_nodes;
        d["mean_edges"] = s.mean_edges;
        return d;
    });

    // --- features ---
    m.def("feature_dim",
          [](const std::string& encoder, bool use_profiles, bool use_retweets,
             std::optional<int> d_text) {
              TextConfig cfg = make_text_config(encoder, use_profiles, use_retweets);
              return d_text ? feature_dim(cfg, *d_text) : feature_dim(cfg);
          },
          py::arg("encoder"), py::arg("use_profiles"), py::arg("use_retweets"),
          py::arg("d_text") = py::none());
    m.def("assemble_features",
          [](const PropagationGraph& g, const std::string& encoder, bool use_profiles,
             bool use_retweets, const StaticTable* table, const ContextualStore* store) {
              TextConfig cfg = make_text_config(encoder, use_profiles, use_retweets);
              return assemble_features(g, cfg, table, store).X;
          },
          py::arg("graph"), py::arg("encoder"), py::arg("use_profiles"), py::arg("use_retweets"),
          py::arg("table") = nullptr, py::arg("store") = nullptr);
    m.def("prop_feature_names", &prop_feature_names);

    // --- augmentation ---
    m.def("neftune_noise",
          [](const Eigen::VectorXd& x, double alpha, std::uint64_t seed) {
              RngStream rng(seed, {static_cast<std::uint64_t>(StreamUse::noise)});
              return neftune_noise(x, alpha, rng);
          },
          py::arg("x"), py::arg("alpha"), py::arg("seed"));
    m.def("oversample",
          [](const std::vector<int>& ids, const std::vector<int>& labels, std::uint64_t seed) {
              RngStream rng(seed, {static_cast<std::uint64_t>(StreamUse::oversample)});
              return oversample(ids, labels_from_ints(labels), rng);
          },
          py::arg("ids"), py::arg("labels"), py::arg("seed"));

    // --- metrics ---
    m.def("f1_macro", &f1_macro, py::arg("labels"), py::arg("probs"), py::arg("threshold") = 0.5);
    m.def("roc_auc", &roc_auc, py::arg("labels"), py::arg("scores"));
    m.def("auc_pr", &auc_pr, py::arg("labels"), py::arg("scores"));

    // --- stats ---
    m.def("wilcoxon_signed_rank",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              WilcoxonResult r = wilcoxon_signed_rank(PairedSample{a, b});
              py::dict d;
              d["p"] = r.p;
              d["w_plus"] = r.w_plus;
              d["w_minus"] = r.w_minus;
              d["n_used"] = r.n_used;
              d["exact"] = r.exact;
              d["degenerate"] = r.degenerate;
              return d;
          },
          py::arg("a"), py::arg("b"));
    m.def("holm_adjust", &holm_adjust, py::arg("p_values"));

    // --- splits ---
    m.def("stratified_split",
          [](const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
              SplitResult r = stratified_split(labels_from_ints(labels), test_fraction, seed);
              return py::make_tuple(r.dev, r.test);
          },
          py::arg("labels"), py::arg("test_fraction"), py::arg("seed"));
    m.def("stratified_kfold",
          [](const std::vector<int>& dev_ids, const std::vector<int>& labels, int k,
             std::uint64_t seed) {
              auto folds = stratified_kfold(dev_ids, labels_from_ints(labels), k, seed);
              std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
              for (const auto& f : folds) out.emplace_back(f.train_ids, f.val_ids);
              return out;
          },
          py::arg("dev_ids"), py::arg("labels"), py::arg("k"), py::arg("seed"));

    // --- synthetic data + experiments ---
    m.def("synth_generate",
          [](const std::string& out_dir, int n_fake, int n_true, int embed_dim,
             double text_signal, double structure_signal, double profile_factor,
             std::uint64_t seed) {
              SynthSpec spec;
              spec.n_fake = n_fake;
              spec.n_true = n_true;
              spec.embed_dim = embed_dim;
              spec.text_signal = text_signal;
              spec.structure_signal = structure_signal;
              spec.profile_factor = profile_factor;
              spec.seed = seed;
              SynthOutput out = synth_generate(spec);
              write_synth_dataset(out, spec, out_dir);
          },
          py::arg("out_dir"), py::arg("n_fake") = 60, py::arg("n_true") = 540,
          py::arg("embed_dim") = 16, py::arg("text_signal") = 0.8,
          py::arg("structure_signal") = 0.0, py::arg("profile_factor") = 0.5,
          py::arg("seed") = 1);

    m.def("run_config",
          [](const std::string& dataset_dir, const std::string& encoder, bool use_profiles,
             bool use_retweets, double alpha, std::uint64_t seed, int epochs, double lr,
             int batch_size, int k_folds, double test_fraction) {
              ExperimentConfig cfg =
                  make_experiment_config(encoder, use_profiles, use_retweets, alpha, seed, epochs,
                                         lr, batch_size, k_folds, test_fraction);
              DataBundle bundle = load_data_dir(dataset_dir);
              PreparedData data = prepare_data(
                  bundle.ds, bundle.table ? &*bundle.table : nullptr,
                  bundle.store ? &*bundle.store : nullptr, seed, k_folds, test_fraction);
              ConfigRunResult r = run_config(data, cfg);
              py::dict d;
              d["f1_macro_mean"] = r.row.aggregate.f1_mean;
              d["f1_macro_std"] = r.row.aggregate.f1_std;
              d["roc_auc_mean"] = r.row.aggregate.roc_mean;
              d["auc_pr_mean"] = r.row.aggregate.pr_mean;
              d["prediction_std"] = r.row.prediction_std;
              std::vector<double> fold_f1;
              for (const auto& fr : r.row.fold_results) fold_f1.push_back(fr.f1_macro);
              d["fold_f1_macro"] = fold_f1;
              return d;
          },
          py::arg("dataset_dir"), py::arg("encoder"), py::arg("use_profiles"),
          py::arg("use_retweets"), py::arg("alpha") = 0.0, py::arg("seed") = 42,
          py::arg("epochs") = 60, py::arg("lr") = 5e-3, py::arg("batch_size") = 0,
          py::arg("k_folds") = 10, py::arg("test_fraction") = 0.10);
}
