"""Model comparison metrics with true negatives excluded.

Displayed itineraries are overwhelmingly non-purchases, so plain accuracy
rewards predicting "no" everywhere. The confusion summary therefore reports
the shares of false negatives, false positives and true positives out of
their combined count, ignoring true negatives.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["ConfusionTriple", "confusion", "compare_models", "prevalence", "write_comparison_table"]


@dataclass(frozen=True)
class ConfusionTriple:
    tn: int
    fn: int
    fp: int
    tp: int

    @property
    def defined(self) -> bool:
        """Shares are undefined when no positives are present or predicted."""
        return (self.fn + self.fp + self.tp) > 0

    @property
    def fn_share(self) -> float:
        self._require_defined()
        return self.fn / (self.fn + self.fp + self.tp)

    @property
    def fp_share(self) -> float:
        self._require_defined()
        return self.fp / (self.fn + self.fp + self.tp)

    @property
    def tp_share(self) -> float:
        self._require_defined()
        return self.tp / (self.fn + self.fp + self.tp)

    def _require_defined(self):
        if not self.defined:
            raise ValueError("shares undefined: no positives predicted or present")


def confusion(labels: Sequence[bool], predictions: Sequence[bool]) -> ConfusionTriple:
    y = np.asarray(labels, dtype=bool)
    p = np.asarray(predictions, dtype=bool)
    if y.shape != p.shape:
        raise ValueError("labels and predictions must have equal length")
    return ConfusionTriple(
        tn=int((~y & ~p).sum()),
        fn=int((y & ~p).sum()),
        fp=int((~y & p).sum()),
        tp=int((y & p).sum()),
    )


def compare_models(
    triple_a: ConfusionTriple, triple_b: ConfusionTriple, names: tuple[str, str] = ("logit", "xgb")
) -> dict[str, str]:
    """Per-metric winner: lower share wins FN and FP, higher wins TP.

    Returns {"fn": name|"tie", "fp": ..., "tp": ...}.
    """
    if not (triple_a.defined and triple_b.defined):
        raise ValueError("both triples must have defined shares")
    out = {}
    for metric, better_low in (("fn", True), ("fp", True), ("tp", False)):
        a = getattr(triple_a, f"{metric}_share")
        b = getattr(triple_b, f"{metric}_share")
        if a == b:
            out[metric] = "tie"
        elif (a < b) == better_low:
            out[metric] = names[0]
        else:
            out[metric] = names[1]
    return out


def prevalence(labels: Sequence[bool]) -> float:
    y = np.asarray(labels, dtype=float)
    if y.size == 0:
        raise ValueError("prevalence of an empty label sequence is undefined")
    return float(y.mean())


def write_comparison_table(
    rows: Sequence[tuple[str, str, ConfusionTriple]],
    path: str | Path,
    header_comment: str | None = None,
) -> None:
    """CSV report with columns od, method, fn, fp, tp (shares)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["od", "method", "fn", "fp", "tp"])
        for od, method, triple in rows:
            if triple.defined:
                writer.writerow(
                    [od, method, f"{triple.fn_share:.4f}", f"{triple.fp_share:.4f}", f"{triple.tp_share:.4f}"]
                )
            else:
                writer.writerow([od, method, "undefined", "undefined", "undefined"])
