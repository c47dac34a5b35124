"""Logistic baseline vs an independent penalized-likelihood optimizer."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import minimize

from farecast.logit import fit_logit, predict_logit, predict_logit_label


def _oracle_fit(Z, y, l2):
    """Minimize the exact penalized NLL on the standardized design."""
    n, m = Z.shape
    A = np.hstack([np.ones((n, 1)), Z])

    def nll(beta):
        eta = A @ beta
        # log(1 + exp(eta)) - y*eta, numerically stable
        val = np.sum(np.logaddexp(0.0, eta) - y * eta)
        return val + 0.5 * l2 * np.sum(beta[1:] ** 2)

    def grad(beta):
        p = 1.0 / (1.0 + np.exp(-(A @ beta)))
        g = A.T @ (p - y)
        g[1:] += l2 * beta[1:]
        return g

    res = minimize(nll, np.zeros(m + 1), jac=grad, method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 500})
    return res.x


@pytest.mark.parametrize("seed", range(20))
def test_coefficients_match_independent_optimizer(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(60, 200))
    m = int(rng.integers(1, 5))
    X = rng.normal(size=(n, m)) * rng.uniform(0.5, 20, size=m) + rng.normal(size=m) * 10
    logits = X @ rng.normal(size=m) * 0.1 + rng.normal() * 0.3
    y = (rng.random(n) < 1 / (1 + np.exp(-logits))).astype(float)
    if y.min() == y.max():
        y[0] = 1 - y[0]

    model = fit_logit(X, y, l2_penalty=1e-6)
    Z = (X - model.mean) / model.scale
    oracle = _oracle_fit(Z, y, 1e-6)
    assert model.intercept == pytest.approx(oracle[0], abs=1e-6)
    assert model.coef == pytest.approx(oracle[1:], abs=1e-6)


def test_mean_imputation_of_missing():
    X = np.array([[1.0, 5.0], [3.0, 0.0], [2.0, 7.0], [0.0, 6.0]])
    missing = np.array([[False, False], [False, True], [False, False], [True, False]])
    y = np.array([0.0, 1.0, 1.0, 0.0])
    model = fit_logit(X, y, missing=missing)
    # prediction with a missing cell equals prediction with the training mean
    x_missing = np.array([[2.0, 0.0]])
    m_mask = np.array([[False, True]])
    x_filled = np.array([[2.0, 6.0]])  # mean of observed column 2 values
    p_a = predict_logit(model, x_missing, m_mask)
    p_b = predict_logit(model, x_filled)
    assert p_a == pytest.approx(p_b)


def test_constant_column_dropped():
    X = np.column_stack([np.ones(50), np.linspace(-1, 1, 50)])
    y = (np.linspace(-1, 1, 50) > 0).astype(float)
    model = fit_logit(X, y)
    assert model.scale[0] == 0.0
    assert model.coef[0] == 0.0
    assert np.isfinite(model.coef).all()


def test_separable_data_stays_finite():
    X = np.linspace(-1, 1, 40).reshape(-1, 1)
    y = (X[:, 0] > 0).astype(float)
    model = fit_logit(X, y)
    assert np.isfinite(model.intercept)
    assert np.isfinite(model.coef).all()


def test_monotone_in_positive_coefficient_feature():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(300, 1))
    y = (rng.random(300) < 1 / (1 + np.exp(-2 * X[:, 0]))).astype(float)
    model = fit_logit(X, y)
    ps = predict_logit(model, np.array([[-1.0], [0.0], [1.0]]))
    assert ps[0] < ps[1] < ps[2]


def test_label_boundary_is_purchase():
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 1.0])
    model = fit_logit(X, y)
    labels = predict_logit_label(model, X)
    assert set(labels.tolist()) <= {0, 1}
    # exact 0.5 maps to 1
    model.coef[:] = 0.0
    model.intercept = 0.0
    assert predict_logit_label(model, X).tolist() == [1, 1]


def test_json_roundtrip():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(80, 3))
    y = (rng.random(80) < 0.4).astype(float)
    model = fit_logit(X, y, feature_names=["a", "b", "c"])
    from farecast.logit import LogitModel

    back = LogitModel.from_json(model.to_json())
    assert np.array_equal(predict_logit(model, X), predict_logit(back, X))
    assert back.feature_names == ["a", "b", "c"]
