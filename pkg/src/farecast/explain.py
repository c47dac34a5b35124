"""Additive per-prediction decomposition of the boosted ensemble.

Every tree's leaf value is decomposed along the root-to-leaf path: each split
contributes the change in cover-weighted expected leaf value between the node
and the chosen child, attributed to the split feature. Summed across trees,
base + sum(contributions) reproduces the predicted log-odds exactly, so the
waterfall view is a faithful picture of the prediction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gbt.model import TreeEnsemble, TreeNode, sigmoid

__all__ = ["Explanation", "explain_prediction", "render_waterfall", "write_waterfall_data"]


@dataclass
class Explanation:
    base: float
    contributions: dict[str, float]
    final_log_odds: float
    final_probability: float
    ordering: list[str] = field(default_factory=list)


def _expected_value(node: TreeNode, cache: dict[int, float]) -> float:
    """Cover-weighted mean of the leaf weights below the node."""
    key = id(node)
    if key in cache:
        return cache[key]
    if node.is_leaf:
        val = node.weight
    else:
        lv = _expected_value(node.left, cache)
        rv = _expected_value(node.right, cache)
        total = node.left.cover + node.right.cover
        val = (node.left.cover * lv + node.right.cover * rv) / total if total > 0 else 0.5 * (lv + rv)
    cache[key] = val
    return val


def explain_prediction(
    model: TreeEnsemble, row: np.ndarray, missing: np.ndarray | None = None
) -> Explanation:
    row = np.asarray(row, dtype=np.float64).ravel()
    if row.shape[0] != len(model.feature_names):
        raise ValueError(f"expected {len(model.feature_names)} features, got {row.shape[0]}")
    if missing is None:
        missing = np.zeros(row.shape, dtype=bool)
    else:
        missing = np.asarray(missing, dtype=bool).ravel()

    base = model.base_score
    contributions: dict[str, float] = {}
    cache: dict[int, float] = {}
    for tree in model.trees:
        base += _expected_value(tree, cache)
        node = tree
        current = _expected_value(node, cache)
        while not node.is_leaf:
            child = node.route(row[node.feature], bool(missing[node.feature]))
            child_val = _expected_value(child, cache)
            name = model.feature_names[node.feature]
            contributions[name] = contributions.get(name, 0.0) + (child_val - current)
            node, current = child, child_val

    final = base + sum(contributions.values())
    ordering = sorted(contributions, key=lambda k: (-abs(contributions[k]), k))
    return Explanation(
        base=base,
        contributions=contributions,
        final_log_odds=final,
        final_probability=sigmoid(final),
        ordering=ordering,
    )


def _trace(explanation: Explanation) -> list[tuple[str, float, float]]:
    """(feature, log-odds contribution, cumulative probability) rows."""
    rows = [("(base)", explanation.base, sigmoid(explanation.base))]
    running = explanation.base
    for name in explanation.ordering:
        running += explanation.contributions[name]
        rows.append((name, explanation.contributions[name], sigmoid(running)))
    return rows


def render_waterfall(explanation: Explanation, max_features: int | None = None) -> str:
    """Text waterfall: features by descending |log-odds|, with the cumulative
    probability trace and the 0.5 purchase cut-off marked."""
    rows = _trace(explanation)
    if max_features is not None:
        rows = rows[: max_features + 1]
    lines = ["feature                      log_odds   delta_prob  cum_prob"]
    prev_p = None
    for name, lo, p in rows:
        delta = "" if prev_p is None else f"{p - prev_p:+10.4f}"
        marker = " <-- crosses 0.5" if prev_p is not None and (prev_p < 0.5) != (p < 0.5) else ""
        lines.append(f"{name:<28} {lo:+9.4f} {delta:>10}  {p:8.4f}{marker}")
        prev_p = p
    verdict = "purchase" if explanation.final_probability >= 0.5 else "no purchase"
    lines.append(
        f"final: log_odds={explanation.final_log_odds:+.4f} "
        f"p={explanation.final_probability:.4f} -> {verdict} (cut-off 0.5)"
    )
    return "\n".join(lines)


def write_waterfall_data(
    explanation: Explanation, path: str | Path, header_comment: str | None = None
) -> None:
    """Plot-data file: ordered (feature, log_odds, cumulative_probability)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["feature", "log_odds", "cumulative_probability"])
        for name, lo, p in _trace(explanation):
            writer.writerow([name, f"{lo:.10g}", f"{p:.10g}"])
