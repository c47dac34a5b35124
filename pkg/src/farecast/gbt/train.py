"""Training, prediction, gain reporting and grid search for the boosted model.

Second-order boosting on the binary logistic loss: per round, gradients
g_i = p_i - y_i and hessians h_i = p_i (1 - p_i) at the current margin;
trees are grown by exact greedy split search over sorted feature values
(midpoint thresholds), each split learning the routing direction for missing
values; leaf weights are the Newton step -G/(H + lam) shrunk by eta. Splits
must improve the structure score by more than gamma.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .kernels import scan_split
from .model import GbtParams, TreeEnsemble, TreeNode, sigmoid

__all__ = [
    "train",
    "predict_margin",
    "predict_proba",
    "predict_label",
    "feature_gain",
    "refit_leaf_weights",
    "grid_search",
    "GridResult",
    "holdout_split_by_day",
]

_PREVALENCE_CLIP = 1e-6


def _check_inputs(X: np.ndarray, y: np.ndarray, missing: np.ndarray | None):
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D feature matrix with at least 2 rows")
    if y.shape[0] != X.shape[0]:
        raise ValueError("labels and features disagree on row count")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if missing is None:
        missing = np.zeros(X.shape, dtype=bool)
    elif missing.shape != X.shape:
        raise ValueError("missing mask shape must match X")
    if not np.isfinite(X[~missing]).all():
        raise ValueError("non-finite feature values; mark missing via the mask")
    return missing


def _grow_node(
    X: np.ndarray,
    missing: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    idx: np.ndarray,
    depth: int,
    feat_ids: np.ndarray,
    params: GbtParams,
) -> TreeNode:
    g_total = float(g[idx].sum())
    h_total = float(h[idx].sum())
    node = TreeNode(cover=h_total, grad_sum=g_total)

    best = (-1.0, -1, 0.0, True)  # gain, feature, threshold, missing_left
    if depth < params.max_depth and idx.shape[0] >= 2:
        for f in feat_ids:
            miss = missing[idx, f]
            present = idx[~miss]
            if present.shape[0] < 2:
                continue
            vals = X[present, f]
            order = np.argsort(vals, kind="stable")
            vals = vals[order]
            rows = present[order]
            g_miss = g_total - float(g[present].sum())
            h_miss = h_total - float(h[present].sum())
            gain, thr, miss_left = scan_split(
                vals, g[rows], h[rows], g_miss, h_miss, params.lam, g_total, h_total
            )
            if gain > best[0]:
                best = (gain, int(f), thr, miss_left)

    gain, feature, threshold, miss_left = best
    if feature < 0 or gain - params.gamma <= 0.0:
        node.weight = -g_total / (h_total + params.lam) * params.eta
        return node

    node.feature = feature
    node.threshold = threshold
    node.missing_left = miss_left
    node.gain = gain
    vals = X[idx, feature]
    miss = missing[idx, feature]
    goes_left = np.where(miss, miss_left, vals < threshold)
    node.left = _grow_node(X, missing, g, h, idx[goes_left], depth + 1, feat_ids, params)
    node.right = _grow_node(X, missing, g, h, idx[~goes_left], depth + 1, feat_ids, params)
    return node


def _margins_tree(tree: TreeNode, X: np.ndarray, missing: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = tree
        while not node.is_leaf:
            node = node.route(X[i, node.feature], bool(missing[i, node.feature]))
        out[i] = node.weight
    return out


def train(
    X: np.ndarray,
    y: np.ndarray,
    params: GbtParams,
    feature_names: Sequence[str] | None = None,
    missing: np.ndarray | None = None,
    eval_set: tuple[np.ndarray, np.ndarray, np.ndarray | None] | None = None,
) -> TreeEnsemble:
    """Fit the boosted ensemble; deterministic given (data, params, seed).

    eval_set, when given as (X_val, y_val, missing_val), populates
    ensemble.rmse_curve with holdout RMSE after each boosting round.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    missing = _check_inputs(X, y, missing)
    n, m = X.shape
    names = list(feature_names) if feature_names is not None else [f"f{j}" for j in range(m)]
    if len(names) != m:
        raise ValueError("feature_names length must match column count")

    prevalence = min(max(float(y.mean()), _PREVALENCE_CLIP), 1 - _PREVALENCE_CLIP)
    base_score = math.log(prevalence / (1 - prevalence))
    rng = np.random.default_rng(params.seed)

    margins = np.full(n, base_score)
    if eval_set is not None:
        X_val, y_val, miss_val = eval_set
        X_val = np.asarray(X_val, dtype=np.float64)
        if miss_val is None:
            miss_val = np.zeros(X_val.shape, dtype=bool)
        val_margins = np.full(X_val.shape[0], base_score)
    rmse_curve: list[float] = []

    trees: list[TreeNode] = []
    n_sub = max(1, round(params.subsample * n))
    m_sub = max(1, round(params.colsample * m))
    for _ in range(params.n_trees):
        p = 1.0 / (1.0 + np.exp(-margins))
        g = p - y
        h = p * (1.0 - p)
        rows = (
            np.sort(rng.choice(n, size=n_sub, replace=False))
            if n_sub < n else np.arange(n)
        )
        cols = (
            np.sort(rng.choice(m, size=m_sub, replace=False))
            if m_sub < m else np.arange(m)
        )
        tree = _grow_node(X, missing, g, h, rows, 0, cols, params)
        trees.append(tree)
        margins += _margins_tree(tree, X, missing)
        if eval_set is not None:
            val_margins += _margins_tree(tree, X_val, miss_val)
            p_val = 1.0 / (1.0 + np.exp(-val_margins))
            rmse_curve.append(float(np.sqrt(np.mean((p_val - y_val) ** 2))))

    ensemble = TreeEnsemble(
        trees=trees,
        base_score=base_score,
        params=params,
        feature_names=names,
        gain_table={},
    )
    ensemble.gain_table = feature_gain(ensemble)
    ensemble.rmse_curve = rmse_curve
    return ensemble


def predict_margin(model: TreeEnsemble, X: np.ndarray, missing: np.ndarray | None = None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != len(model.feature_names):
        raise ValueError(
            f"expected {len(model.feature_names)} features, got {X.shape[1]}"
        )
    if missing is None:
        missing = np.zeros(X.shape, dtype=bool)
    else:
        missing = np.atleast_2d(missing)
    margins = np.full(X.shape[0], model.base_score)
    for tree in model.trees:
        margins += _margins_tree(tree, X, missing)
    return margins


def predict_proba(model: TreeEnsemble, X: np.ndarray, missing: np.ndarray | None = None) -> np.ndarray:
    """Purchase probability, strictly inside (0, 1)."""
    return 1.0 / (1.0 + np.exp(-predict_margin(model, X, missing)))


def predict_label(model: TreeEnsemble, X: np.ndarray, missing: np.ndarray | None = None) -> np.ndarray:
    """Round to the nearest integer; the p = 0.5 boundary counts as purchase."""
    return predict_proba(model, X, missing) >= 0.5


def feature_gain(model: TreeEnsemble, reporting_floor: float | None = None) -> dict[str, float]:
    """Per-feature realized split gain, normalized to sum 1.

    With reporting_floor set, entries below the floor are dropped from the
    returned view (reporting filter only). Ensembles without splits give an
    empty table.
    """
    totals: dict[str, float] = {}

    def walk(node: TreeNode):
        if node.is_leaf:
            return
        name = model.feature_names[node.feature]
        totals[name] = totals.get(name, 0.0) + node.gain
        walk(node.left)
        walk(node.right)

    for tree in model.trees:
        walk(tree)
    total = sum(totals.values())
    if total <= 0:
        return {}
    shares = {k: v / total for k, v in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))}
    if reporting_floor is not None:
        shares = {k: v for k, v in shares.items() if v >= reporting_floor}
    return shares


def refit_leaf_weights(model: TreeEnsemble, lam: float) -> TreeEnsemble:
    """Recompute leaf weights -G/(H+lam)*eta on the fixed tree structures."""

    def rebuild(node: TreeNode) -> TreeNode:
        if node.is_leaf:
            return TreeNode(
                cover=node.cover,
                grad_sum=node.grad_sum,
                weight=-node.grad_sum / (node.cover + lam) * model.params.eta,
            )
        return TreeNode(
            cover=node.cover,
            grad_sum=node.grad_sum,
            feature=node.feature,
            threshold=node.threshold,
            missing_left=node.missing_left,
            gain=node.gain,
            left=rebuild(node.left),
            right=rebuild(node.right),
        )

    out = TreeEnsemble(
        trees=[rebuild(t) for t in model.trees],
        base_score=model.base_score,
        params=replace(model.params, lam=lam),
        feature_names=list(model.feature_names),
        gain_table=dict(model.gain_table),
    )
    return out


def holdout_split_by_day(dep_day_ids: np.ndarray, holdout_frac: float = 0.2) -> np.ndarray:
    """Boolean holdout mask: the latest holdout_frac of departure days.

    Splitting on departure day prevents itineraries of one flight from
    landing on both sides of the split.
    """
    days = np.unique(dep_day_ids)
    n_hold = max(1, int(round(holdout_frac * days.shape[0])))
    if n_hold >= days.shape[0]:
        raise ValueError("holdout would swallow every departure day")
    cutoff = days[-n_hold]
    return dep_day_ids >= cutoff


@dataclass
class GridResult:
    best_params: GbtParams
    best_rmse: float
    curves: dict[tuple, list[float]]
    cells: list[tuple[GbtParams, float]]


DEFAULT_GRIDS: dict[str, tuple] = {
    "eta": tuple(round(0.01 * k, 2) for k in range(1, 11)) + (0.2, 0.3, 0.5),
    "n_trees": tuple(range(50, 501, 50)),
    "max_depth": tuple(range(3, 21)),
    "subsample": tuple(round(0.1 * k, 1) for k in range(2, 11)),
    "colsample": (1.0,),
}


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    dep_day_ids: np.ndarray,
    grids: Mapping[str, Sequence] | None = None,
    base_params: GbtParams = GbtParams(),
    missing: np.ndarray | None = None,
    holdout_frac: float = 0.2,
) -> GridResult:
    """Exhaustive search over the hyperparameter grid on a day-based holdout.

    Cell score is the minimum holdout RMSE across boosting rounds; ties break
    toward cheaper configurations (smaller max_depth, then fewer trees, then
    larger subsample).
    """
    grids = dict(DEFAULT_GRIDS if grids is None else grids)
    hold = holdout_split_by_day(np.asarray(dep_day_ids), holdout_frac)
    if hold.all() or not hold.any():
        raise ValueError("degenerate holdout split")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if missing is None:
        missing = np.zeros(X.shape, dtype=bool)
    X_tr, y_tr, m_tr = X[~hold], y[~hold], missing[~hold]
    X_va, y_va, m_va = X[hold], y[hold], missing[hold]

    keys = sorted(grids)
    curves: dict[tuple, list[float]] = {}
    cells: list[tuple[GbtParams, float]] = []
    best: tuple | None = None
    for combo in itertools.product(*(grids[k] for k in keys)):
        cell = dict(zip(keys, combo))
        params = replace(base_params, **cell)
        model = train(X_tr, y_tr, params, missing=m_tr, eval_set=(X_va, y_va, m_va))
        curve = model.rmse_curve
        score = min(curve)
        curves[combo] = curve
        cells.append((params, score))
        rank = (score, params.max_depth, params.n_trees, -params.subsample)
        if best is None or rank < best[0]:
            best = (rank, params, score)
    return GridResult(best_params=best[1], best_rmse=best[2], curves=curves, cells=cells)
