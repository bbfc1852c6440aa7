"""Smoke tests for the python bindings.

The heavy numerical verification lives in the C++ suites; these check that
the bound surface behaves sensibly end to end.
"""

import math

import numpy as np
import pytest

import propgat


def test_tokenize_normalizes():
    assert propgat.tokenize("Hello, World!") == ["hello", "world"]
    assert propgat.tokenize("RT @foo: see https://x.co") == ["rt", "@user", "see", "httpurl"]
    assert propgat.tokenize("") == []


def test_static_table_embedding(tmp_path):
    table_path = tmp_path / "table.txt"
    table_path.write_text("aa 1 0\nbb 0 1\n")
    table = propgat.load_static_table(str(table_path))
    assert table.dimension == 2
    assert len(table) == 2
    np.testing.assert_allclose(table.embed("aa bb"), [0.5, 0.5])
    np.testing.assert_allclose(table.embed("zz"), [0.0, 0.0])
    assert table.vector("zz") is None


def test_neftune_noise_bound():
    x = np.array([3.0, 4.0, 0.5, -1.0])
    alpha = 10.0
    bound = alpha / math.sqrt(np.linalg.norm(x))
    for seed in range(20):
        xp = propgat.neftune_noise(x, alpha, seed)
        assert np.max(np.abs(xp - x)) <= bound * (1 + 1e-12)
    np.testing.assert_array_equal(propgat.neftune_noise(x, 0.0, 1), x)


def test_metrics_match_reference_values():
    assert propgat.roc_auc([1, 0, 1, 0], [0.9, 0.8, 0.4, 0.2]) == pytest.approx(0.75)
    assert propgat.auc_pr([1, 0, 1], [0.9, 0.8, 0.7]) == pytest.approx(5.0 / 6.0)
    labels = [0] * 9 + [1]
    probs = [0.1] * 10
    assert propgat.f1_macro(labels, probs) == pytest.approx(9.0 / 19.0)


def test_wilcoxon_and_holm():
    r = propgat.wilcoxon_signed_rank([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
    assert r["exact"]
    assert r["p"] == pytest.approx(0.0625)
    adj = propgat.holm_adjust([0.01, 0.04, 0.03])
    assert adj == pytest.approx([0.03, 0.06, 0.06])


def test_splits_are_stratified_and_deterministic():
    labels = [1] * 20 + [0] * 80
    dev, test = propgat.stratified_split(labels, 0.1, seed=7)
    assert len(test) == 10
    assert sum(labels[i] for i in test) == 2
    assert sorted(dev + test) == list(range(100))
    dev2, test2 = propgat.stratified_split(labels, 0.1, seed=7)
    assert (dev, test) == (dev2, test2)

    folds = propgat.stratified_kfold(dev, labels, 5, seed=7)
    assert len(folds) == 5
    seen = set()
    for train_ids, val_ids in folds:
        assert set(train_ids).isdisjoint(val_ids)
        seen.update(val_ids)
    assert seen == set(dev)


def test_oversample_balances():
    ids = list(range(8))
    labels = [1, 1] + [0] * 6
    out = propgat.oversample(ids, labels, seed=3)
    assert len(out) == 12
    assert sum(1 for i in out if labels[i] == 1) == 6


def test_synth_dataset_and_features(tmp_path):
    out_dir = tmp_path / "ds"
    propgat.synth_generate(str(out_dir), n_fake=6, n_true=18, embed_dim=8,
                           text_signal=0.5, structure_signal=0.0, seed=11)
    ds = propgat.load_dataset(str(out_dir / "graphs.jsonl"))
    assert len(ds) == 24
    stats = propgat.dataset_stats(ds)
    assert stats["n_fake"] == 6
    assert stats["n_true"] == 18

    g = ds.graph(0)
    assert propgat.validate_graph(g) == []

    store = propgat.load_contextual_store(str(out_dir / "contextual_store.jsonl"))
    assert store.dimension == 8
    X = propgat.assemble_features(g, "contextual", True, True, store=store)
    assert X.shape == (g.num_nodes, 10 + 2 * 8)
    assert propgat.feature_dim("contextual", True, True, d_text=8) == 26
    assert propgat.feature_dim("contextual", True, True) == 1546

    table = propgat.load_static_table(str(out_dir / "static_table.txt"))
    X2 = propgat.assemble_features(g, "static", False, True, table=table)
    assert X2.shape == (g.num_nodes, 10 + 8)
    # the propagation block is independent of the text configuration
    np.testing.assert_array_equal(X[:, :10], X2[:, :10])


def test_run_config_end_to_end(tmp_path):
    out_dir = tmp_path / "ds"
    propgat.synth_generate(str(out_dir), n_fake=8, n_true=24, embed_dim=8,
                           text_signal=0.8, structure_signal=0.0, seed=21)
    result = propgat.run_config(str(out_dir), "contextual", True, True,
                                alpha=0.0, seed=5, epochs=4, batch_size=8,
                                k_folds=2, test_fraction=0.0)
    assert len(result["fold_f1_macro"]) == 2
    assert 0.0 <= result["f1_macro_mean"] <= 100.0
    again = propgat.run_config(str(out_dir), "contextual", True, True,
                               alpha=0.0, seed=5, epochs=4, batch_size=8,
                               k_folds=2, test_fraction=0.0)
    assert result["fold_f1_macro"] == again["fold_f1_macro"]
