"""Boosted-tree learner: split oracle, hand examples, invariants, parity."""

from __future__ import annotations

import math

import numpy as np
import pytest

from farecast import gbt
from farecast.gbt.kernels import _scan_split_np, _scan_split_py, scan_split
from farecast.gbt.train import holdout_split_by_day


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


# --- exhaustive split oracle -------------------------------------------------

def oracle_best_gain(X, y, missing, lam):
    """Brute-force best first-split gain at base prevalence log-odds."""
    prevalence = min(max(y.mean(), 1e-6), 1 - 1e-6)
    p = sigmoid(math.log(prevalence / (1 - prevalence)))
    g = p - y
    h = np.full_like(g, p * (1 - p))
    g_tot, h_tot = g.sum(), h.sum()
    parent = g_tot**2 / (h_tot + lam)
    best = -np.inf
    for f in range(X.shape[1]):
        present = ~missing[:, f]
        vals = np.unique(X[present, f])
        g_miss = g[~present].sum()
        h_miss = h[~present].sum()
        for lo, hi in zip(vals, vals[1:]):
            thr = (lo + hi) / 2
            left = present & (X[:, f] < thr)
            right = present & ~left
            for miss_left in (True, False):
                gl = g[left].sum() + (g_miss if miss_left else 0.0)
                hl = h[left].sum() + (h_miss if miss_left else 0.0)
                gr = g_tot - gl
                hr = h_tot - hl
                gain = 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - parent)
                best = max(best, gain)
    return best


def _random_instance(rng):
    n = int(rng.integers(5, 101))
    m = int(rng.integers(1, 5))
    X = rng.integers(0, 8, size=(n, m)).astype(float)
    y = rng.integers(0, 2, size=n).astype(float)
    missing = rng.random((n, m)) < 0.15
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return X, y, missing


@pytest.mark.parametrize("seed", range(20))
def test_learned_split_matches_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    X, y, missing = _random_instance(rng)
    params = gbt.GbtParams(n_trees=1, max_depth=1, gamma=0.0, lam=1.0)
    model = gbt.train(X, y, params, missing=missing)
    root = model.trees[0]
    want = oracle_best_gain(X, y, missing, params.lam)
    if root.is_leaf:
        assert want <= 0.0 + 1e-12
    else:
        assert root.gain == pytest.approx(want, abs=1e-9)


# --- hand-computed examples --------------------------------------------------

def test_identical_features_opposite_labels_stay_at_half():
    X = np.zeros((2, 1))
    y = np.array([1.0, 0.0])
    model = gbt.train(X, y, gbt.GbtParams(n_trees=1, max_depth=1))
    assert model.trees[0].is_leaf
    assert model.trees[0].weight == 0.0
    assert gbt.predict_proba(model, X)[0] == pytest.approx(0.5)


def test_hand_computed_leaf_weights_and_gain():
    # Balanced perfectly-separable data: base log-odds 0, p = 0.5, so
    # g = +-0.5 and h = 0.25. Each side: G = +-1, H = 0.5, w* = -G/(H+1),
    # shrunk by eta = 0.3 -> -+0.2; split gain = 1/2 (1/1.5 + 1/1.5 - 0) = 2/3.
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    model = gbt.train(X, y, gbt.GbtParams(n_trees=1, max_depth=1, eta=0.3, lam=1.0, gamma=0.0))
    root = model.trees[0]
    assert not root.is_leaf
    assert root.threshold == pytest.approx(0.5)
    assert root.gain == pytest.approx(2 / 3)
    assert root.left.weight == pytest.approx(-0.2)  # left side holds the zeros
    assert root.right.weight == pytest.approx(0.2)
    margins = gbt.predict_margin(model, X)
    assert margins == pytest.approx([-0.2, -0.2, 0.2, 0.2])


def test_empty_like_ensemble_predicts_base():
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 1.0])
    model = gbt.train(X, y, gbt.GbtParams(n_trees=1, max_depth=1, gamma=10.0))
    # huge gamma forces a single leaf with zero weight; p stays at prevalence
    assert gbt.predict_proba(model, X)[0] == pytest.approx(0.5)


def test_label_boundary_counts_as_purchase():
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 1.0])
    model = gbt.train(X, y, gbt.GbtParams(n_trees=1, max_depth=1, gamma=10.0))
    assert gbt.predict_label(model, X).tolist() == [1, 1]  # p = 0.5 exactly


# --- invariants ---------------------------------------------------------------

def _training_data(seed=0, n=400, m=6):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    logits = 1.5 * X[:, 0] - 1.0 * X[:, 1] * (X[:, 2] > 0) - 0.8
    y = (rng.random(n) < sigmoid(logits)).astype(float)
    return X, y


def test_training_logloss_non_increasing():
    X, y = _training_data()
    params = gbt.GbtParams(n_trees=10, max_depth=3, eta=0.3, gamma=0.0,
                           subsample=1.0, colsample=1.0)
    model = gbt.train(X, y, params)
    margins = np.full(len(y), model.base_score)
    losses = []
    for tree in model.trees:
        from farecast.gbt.train import _margins_tree

        margins = margins + _margins_tree(tree, X, np.zeros(X.shape, bool))
        p = sigmoid(margins)
        losses.append(float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))))
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_lambda_monotonicity_on_fixed_structure():
    X, y = _training_data(1)
    model = gbt.train(X, y, gbt.GbtParams(n_trees=5, max_depth=3, lam=1.0))

    def max_abs_leaf(m):
        out = 0.0
        def walk(node):
            nonlocal out
            if node.is_leaf:
                out = max(out, abs(node.weight))
            else:
                walk(node.left)
                walk(node.right)
        for t in m.trees:
            walk(t)
        return out

    maxima = [max_abs_leaf(gbt.refit_leaf_weights(model, lam)) for lam in (0.0, 1.0, 10.0)]
    assert maxima[0] >= maxima[1] >= maxima[2]


def test_gamma_monotonicity_of_leaf_count():
    X, y = _training_data(2)
    leaves = []
    for gamma in (0.0, 0.25, 1.0):
        model = gbt.train(X, y, gbt.GbtParams(n_trees=5, max_depth=4, gamma=gamma))
        leaves.append(model.n_leaves())
    assert leaves[0] >= leaves[1] >= leaves[2]


def test_determinism_bit_for_bit():
    X, y = _training_data(3)
    params = gbt.GbtParams(n_trees=8, max_depth=3, subsample=0.7, colsample=0.8, seed=11)
    a = gbt.train(X, y, params).to_json()
    b = gbt.train(X, y, params).to_json()
    assert a == b


def test_different_seed_changes_subsampled_model():
    X, y = _training_data(3)
    a = gbt.train(X, y, gbt.GbtParams(n_trees=8, subsample=0.5, seed=1)).to_json()
    b = gbt.train(X, y, gbt.GbtParams(n_trees=8, subsample=0.5, seed=2)).to_json()
    assert a != b


def test_serialization_roundtrip_preserves_predictions():
    X, y = _training_data(4)
    model = gbt.train(X, y, gbt.GbtParams(n_trees=5, max_depth=3))
    back = gbt.TreeEnsemble.from_json(model.to_json())
    assert np.array_equal(gbt.predict_margin(model, X), gbt.predict_margin(back, X))
    assert back.gain_table == model.gain_table


def test_gain_table_normalized_and_floor():
    X, y = _training_data(5)
    model = gbt.train(X, y, gbt.GbtParams(n_trees=10, max_depth=3))
    gains = gbt.feature_gain(model)
    assert sum(gains.values()) == pytest.approx(1.0)
    assert all(v >= 0 for v in gains.values())
    floored = gbt.feature_gain(model, reporting_floor=0.05)
    assert all(v >= 0.05 for v in floored.values())
    assert set(floored) <= set(gains)


def test_no_split_gain_table_empty():
    X = np.zeros((4, 2))
    y = np.array([0.0, 1.0, 0.0, 1.0])
    model = gbt.train(X, y, gbt.GbtParams(n_trees=2, max_depth=2))
    assert gbt.feature_gain(model) == {}


def test_missing_direction_learned():
    # missing rows are the only positives; present values carry no signal
    X = np.array([[0.0], [0.0], [0.0], [1.0], [0.0], [0.0]])
    missing = np.array([[False], [False], [False], [False], [True], [True]])
    y = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 1.0])
    model = gbt.train(X, y, gbt.GbtParams(n_trees=4, max_depth=2), missing=missing)
    p_missing = gbt.predict_proba(model, np.array([[0.0]]), np.array([[True]]))[0]
    p_zero = gbt.predict_proba(model, np.array([[0.0]]), np.array([[False]]))[0]
    assert p_missing > p_zero  # missing rows routed toward the positive side


def test_rejects_bad_inputs():
    with pytest.raises(ValueError, match="labels"):
        gbt.train(np.zeros((3, 1)), np.array([0.0, 2.0, 1.0]), gbt.GbtParams())
    with pytest.raises(ValueError, match="non-finite"):
        gbt.train(np.array([[np.nan], [1.0]]), np.array([0.0, 1.0]), gbt.GbtParams())
    with pytest.raises(ValueError):
        gbt.GbtParams(eta=0.0)
    with pytest.raises(ValueError):
        gbt.GbtParams(subsample=0.0)


def test_rmse_curve_length_and_quick_descent():
    X, y = _training_data(6)
    params = gbt.GbtParams(n_trees=10, max_depth=3, eta=0.3)
    model = gbt.train(X, y, params, eval_set=(X, y, None))
    assert len(model.rmse_curve) == 10
    assert model.rmse_curve[-1] <= model.rmse_curve[0]


# --- kernels ------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_numpy_and_python_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    vals = np.sort(rng.integers(0, 6, size=n).astype(float))
    g = rng.normal(size=n)
    h = rng.random(n) * 0.25 + 0.01
    g_miss = float(rng.normal())
    h_miss = float(rng.random())
    g_tot = float(g.sum() + g_miss)
    h_tot = float(h.sum() + h_miss)
    a = _scan_split_py(vals, g, h, g_miss, h_miss, 1.0, g_tot, h_tot)
    b = _scan_split_np(vals, g, h, g_miss, h_miss, 1.0, g_tot, h_tot)
    assert a[0] == pytest.approx(b[0], abs=1e-10)
    if a[0] > 0:
        assert a[1] == pytest.approx(b[1])
        assert a[2] == b[2]


def test_numba_kernel_matches_python_if_enabled():
    if not gbt.numba_enabled():
        pytest.skip("numba disabled via environment")
    from farecast.gbt.kernels import _scan_split_nb

    rng = np.random.default_rng(0)
    for _ in range(5):
        n = int(rng.integers(2, 40))
        vals = np.sort(rng.integers(0, 5, size=n).astype(float))
        g = rng.normal(size=n)
        h = rng.random(n) * 0.25 + 0.01
        args = (vals, g, h, 0.3, 0.1, 1.0, float(g.sum() + 0.3), float(h.sum() + 0.1))
        assert _scan_split_nb(*args) == pytest.approx(_scan_split_py(*args))


# --- holdout & grid search ------------------------------------------------------

def test_holdout_takes_latest_days():
    days = np.array([1, 1, 2, 2, 3, 3, 4, 4, 5, 5])
    mask = holdout_split_by_day(days, 0.2)
    assert set(days[mask]) == {5}
    assert set(days[~mask]) == {1, 2, 3, 4}


def test_grid_search_single_cell_and_dominance():
    X, y = _training_data(7, n=300)
    days = np.repeat(np.arange(10), 30)
    grids = {"n_trees": [5], "max_depth": [2]}
    result = gbt.grid_search(X, y, days, grids=grids)
    assert result.best_params.n_trees == 5
    assert result.best_params.max_depth == 2

    grids = {"n_trees": [1, 10], "max_depth": [3]}
    result = gbt.grid_search(X, y, days, grids=grids)
    assert result.best_params.n_trees == 10


def test_grid_search_prefers_depth2_for_interaction_label():
    rng = np.random.default_rng(8)
    n = 600
    X = rng.normal(size=(n, 2))
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(float)  # pure interaction
    days = np.repeat(np.arange(10), 60)
    result = gbt.grid_search(X, y, days, grids={"max_depth": [1, 2], "n_trees": [30]})
    assert result.best_params.max_depth == 2
