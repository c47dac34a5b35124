"""From-scratch gradient boosted trees with a binary logistic objective."""

from .model import TreeNode, TreeEnsemble, GbtParams
from .train import (
    train,
    predict_proba,
    predict_label,
    predict_margin,
    feature_gain,
    grid_search,
    refit_leaf_weights,
    holdout_split_by_day,
    GridResult,
)
from .kernels import numba_enabled

__all__ = [
    "GbtParams",
    "TreeNode",
    "TreeEnsemble",
    "GridResult",
    "train",
    "predict_proba",
    "predict_label",
    "predict_margin",
    "feature_gain",
    "grid_search",
    "refit_leaf_weights",
    "holdout_split_by_day",
    "numba_enabled",
]
