"""Propagation-graph disinformation detection experiments.

Thin Python surface over the C++ core: dataset ingestion, text-enriched node
features, graph-attention training, evaluation metrics, Wilcoxon-Holm
analysis and the synthetic-data experiment harness.
"""

from propgat._core import (  # noqa: F401
    ContextualStore,
    Dataset,
    PropagationGraph,
    StaticTable,
    assemble_features,
    auc_pr,
    dataset_stats,
    f1_macro,
    feature_dim,
    holm_adjust,
    load_contextual_store,
    load_dataset,
    load_static_table,
    neftune_noise,
    oversample,
    prop_feature_names,
    roc_auc,
    run_config,
    stratified_kfold,
    stratified_split,
    synth_generate,
    tokenize,
    validate_graph,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"
