"""Logistic-regression baseline fitted by iteratively reweighted least squares.

Features are standardized internally (constant columns dropped), missing
values are mean-imputed, and a small ridge penalty on the slopes (not the
intercept) keeps separable instances finite. The 0.5 decision boundary is
shared with the boosted model: p >= 0.5 predicts purchase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from scipy.special import expit

import numpy as np

__all__ = ["LogitModel", "fit_logit", "predict_logit", "predict_logit_label"]

log = logging.getLogger(__name__)


@dataclass
class LogitModel:
    intercept: float
    coef: np.ndarray          # slopes on the standardized scale
    mean: np.ndarray          # imputation + centering constants (raw scale)
    scale: np.ndarray         # per-column sd; 0 marks a dropped constant column
    feature_names: list[str]
    iterations: int
    grad_norm: float
    converged: bool

    def coefficient_table(self) -> list[tuple[str, float, float, float]]:
        """(feature, standardized coefficient, center, scale) per column."""
        return [
            (name, float(c), float(m), float(s))
            for name, c, m, s in zip(self.feature_names, self.coef, self.mean, self.scale)
        ]

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "format": "farecast-logit",
                "version": 1,
                "intercept": self.intercept,
                "coef": self.coef.tolist(),
                "mean": self.mean.tolist(),
                "scale": self.scale.tolist(),
                "feature_names": self.feature_names,
                "iterations": self.iterations,
                "grad_norm": self.grad_norm,
                "converged": self.converged,
            },
            sort_keys=True,
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "LogitModel":
        import json

        obj = json.loads(text)
        if obj.get("format") != "farecast-logit":
            raise ValueError("not a logistic-baseline model file")
        return cls(
            intercept=float(obj["intercept"]),
            coef=np.array(obj["coef"], dtype=float),
            mean=np.array(obj["mean"], dtype=float),
            scale=np.array(obj["scale"], dtype=float),
            feature_names=list(obj["feature_names"]),
            iterations=int(obj["iterations"]),
            grad_norm=float(obj["grad_norm"]),
            converged=bool(obj["converged"]),
        )


def _standardize(X: np.ndarray, missing: np.ndarray | None):
    X = np.asarray(X, dtype=np.float64).copy()
    if missing is not None:
        for j in range(X.shape[1]):
            col_missing = missing[:, j]
            observed = X[~col_missing, j]
            fill = observed.mean() if observed.size else 0.0
            X[col_missing, j] = fill
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    scale = np.where(sd > 0, sd, 0.0)
    Z = np.zeros_like(X)
    active = scale > 0
    Z[:, active] = (X[:, active] - mean[active]) / scale[active]
    return Z, mean, scale


def fit_logit(
    X: np.ndarray,
    y: np.ndarray,
    feature_names: list[str] | None = None,
    missing: np.ndarray | None = None,
    l2_penalty: float = 1e-6,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> LogitModel:
    """Penalized maximum-likelihood fit via IRLS (Newton steps).

    Non-convergence is reported, not raised: the model is returned with
    converged=False and a warning.
    """
    y = np.asarray(y, dtype=np.float64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    Z, mean, scale = _standardize(X, missing)
    n, m = Z.shape
    names = feature_names if feature_names is not None else [f"f{j}" for j in range(m)]

    A = np.hstack([np.ones((n, 1)), Z])
    beta = np.zeros(m + 1)
    penalty = np.full(m + 1, l2_penalty)
    penalty[0] = 0.0  # intercept unpenalized

    grad_norm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        eta = A @ beta
        p = expit(eta)
        grad = A.T @ (p - y) + penalty * beta
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < tol:
            break
        w = np.clip(p * (1.0 - p), 1e-12, None)
        hess = (A * w[:, None]).T @ A + np.diag(penalty)
        beta = beta - np.linalg.solve(hess, grad)

    converged = grad_norm < tol
    if not converged:
        log.warning(
            "IRLS did not converge in %d iterations (grad norm %.3g)", max_iter, grad_norm
        )
    return LogitModel(
        intercept=float(beta[0]),
        coef=beta[1:],
        mean=mean,
        scale=scale,
        feature_names=list(names),
        iterations=it,
        grad_norm=grad_norm,
        converged=converged,
    )


def predict_logit(model: LogitModel, X: np.ndarray, missing: np.ndarray | None = None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64)).copy()
    if X.shape[1] != model.coef.shape[0]:
        raise ValueError(f"expected {model.coef.shape[0]} features, got {X.shape[1]}")
    if missing is not None:
        missing = np.atleast_2d(missing)
        for j in range(X.shape[1]):
            X[missing[:, j], j] = model.mean[j]
    active = model.scale > 0
    Z = np.zeros_like(X)
    Z[:, active] = (X[:, active] - model.mean[active]) / model.scale[active]
    eta = model.intercept + Z @ model.coef
    return expit(eta)


def predict_logit_label(model: LogitModel, X: np.ndarray, missing: np.ndarray | None = None) -> np.ndarray:
    return predict_logit(model, X, missing) >= 0.5
