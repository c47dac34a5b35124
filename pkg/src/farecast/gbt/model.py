"""Boosted-ensemble model structures and self-describing serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

__all__ = ["GbtParams", "TreeNode", "TreeEnsemble", "sigmoid"]


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class GbtParams:
    eta: float = 0.3
    n_trees: int = 10
    max_depth: int = 4
    subsample: float = 1.0
    colsample: float = 1.0
    gamma: float = 0.25
    lam: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")
        if not (0 < self.subsample <= 1 and 0 < self.colsample <= 1):
            raise ValueError("subsample and colsample must be in (0, 1]")
        if self.gamma < 0 or self.lam < 0:
            raise ValueError("gamma and lam must be nonnegative")


@dataclass
class TreeNode:
    """Either a split node (feature/threshold/children) or a leaf (weight).

    cover is the hessian mass of the training rows routed through the node;
    grad_sum the corresponding gradient mass (kept so leaf weights can be
    re-derived for any ridge penalty). gain is the realized structure-score
    improvement of the split, 0 for leaves. Leaf weights already include the
    learning-rate shrinkage.
    """

    cover: float
    grad_sum: float
    weight: float = 0.0
    feature: int = -1
    threshold: float = 0.0
    missing_left: bool = True
    gain: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def route(self, value: float, missing: bool) -> "TreeNode":
        if missing:
            return self.left if self.missing_left else self.right
        return self.left if value < self.threshold else self.right

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()

    def to_dict(self) -> dict:
        d = {"cover": self.cover, "grad_sum": self.grad_sum}
        if self.is_leaf:
            d["weight"] = self.weight
        else:
            d.update(
                feature=self.feature,
                threshold=self.threshold,
                missing_left=self.missing_left,
                gain=self.gain,
                left=self.left.to_dict(),
                right=self.right.to_dict(),
            )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "left" in d:
            return cls(
                cover=d["cover"],
                grad_sum=d["grad_sum"],
                feature=d["feature"],
                threshold=d["threshold"],
                missing_left=d["missing_left"],
                gain=d["gain"],
                left=cls.from_dict(d["left"]),
                right=cls.from_dict(d["right"]),
            )
        return cls(cover=d["cover"], grad_sum=d["grad_sum"], weight=d["weight"])


@dataclass
class TreeEnsemble:
    trees: list[TreeNode]
    base_score: float
    params: GbtParams
    feature_names: list[str]
    gain_table: dict[str, float] = field(default_factory=dict)
    # holdout RMSE after each boosting round; populated when training with an
    # eval set, reported separately from the serialized model
    rmse_curve: list[float] = field(default_factory=list)

    def n_leaves(self) -> int:
        return sum(t.n_leaves() for t in self.trees)

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": "farecast-gbt",
                "version": 1,
                "base_score": self.base_score,
                "params": asdict(self.params),
                "feature_names": self.feature_names,
                "gain_table": self.gain_table,
                "trees": [t.to_dict() for t in self.trees],
            },
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "TreeEnsemble":
        d = json.loads(text)
        if d.get("format") != "farecast-gbt":
            raise ValueError("not a farecast gbt model file")
        return cls(
            trees=[TreeNode.from_dict(t) for t in d["trees"]],
            base_score=d["base_score"],
            params=GbtParams(**d["params"]),
            feature_names=list(d["feature_names"]),
            gain_table={k: float(v) for k, v in d["gain_table"].items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TreeEnsemble":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))
