"""Hot split-search kernel with a numba fast path and a pure-numpy fallback.

Set FARECAST_DISABLE_NUMBA=1 (or any nonempty value other than "0") to force
the numpy path; both paths produce identical splits. The kernel scans one
feature at a node: given values sorted ascending with their gradient/hessian
pairs, plus the pooled gradient/hessian of rows whose value is missing, it
returns the best structure-score gain over all midpoint thresholds and both
missing-routing directions.

Gain convention (regularized second-order structure score improvement):

    gain = 0.5 * (GL^2/(HL+lam) + GR^2/(HR+lam) - GT^2/(HT+lam))

where GT/HT include the missing rows. Ties keep the first (lowest) threshold
and prefer routing missing values left.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("FARECAST_DISABLE_NUMBA", "0") not in ("", "0")

if not _DISABLE:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLE = True


def numba_enabled() -> bool:
    return not _DISABLE


def _scan_split_py(values, grads, hess, g_miss, h_miss, lam, g_total, h_total):
    n = values.shape[0]
    parent = g_total * g_total / (h_total + lam)
    best_gain = -1.0
    best_thr = 0.0
    best_miss_left = True
    gl = 0.0
    hl = 0.0
    for i in range(n - 1):
        gl += grads[i]
        hl += hess[i]
        if values[i] == values[i + 1]:
            continue
        thr = 0.5 * (values[i] + values[i + 1])
        # missing left
        gl_m = gl + g_miss
        hl_m = hl + h_miss
        gr_m = g_total - gl_m
        hr_m = h_total - hl_m
        gain = 0.5 * (
            gl_m * gl_m / (hl_m + lam) + gr_m * gr_m / (hr_m + lam) - parent
        )
        if gain > best_gain:
            best_gain = gain
            best_thr = thr
            best_miss_left = True
        # missing right
        gr = g_total - g_miss - gl
        hr = h_total - h_miss - hl
        gain = 0.5 * (
            gl * gl / (hl + lam)
            + (gr + g_miss) * (gr + g_miss) / (hr + h_miss + lam)
            - parent
        )
        if gain > best_gain:
            best_gain = gain
            best_thr = thr
            best_miss_left = False
    return best_gain, best_thr, best_miss_left


if not _DISABLE:
    _scan_split_nb = njit(cache=True, fastmath=False)(_scan_split_py)


def _scan_split_np(values, grads, hess, g_miss, h_miss, lam, g_total, h_total):
    n = values.shape[0]
    if n < 2:
        return -1.0, 0.0, True
    gl = np.cumsum(grads)[:-1]
    hl = np.cumsum(hess)[:-1]
    valid = values[:-1] != values[1:]
    if not valid.any():
        return -1.0, 0.0, True
    parent = g_total * g_total / (h_total + lam)

    gl_m = gl + g_miss
    hl_m = hl + h_miss
    gain_left = 0.5 * (
        gl_m**2 / (hl_m + lam)
        + (g_total - gl_m) ** 2 / (h_total - hl_m + lam)
        - parent
    )
    gr = g_total - g_miss - gl
    hr = h_total - h_miss - hl
    gain_right = 0.5 * (
        gl**2 / (hl + lam)
        + (gr + g_miss) ** 2 / (hr + h_miss + lam)
        - parent
    )
    gain_left = np.where(valid, gain_left, -np.inf)
    gain_right = np.where(valid, gain_right, -np.inf)
    # per-position best, preferring missing-left on ties
    take_left = gain_left >= gain_right
    per_pos = np.where(take_left, gain_left, gain_right)
    pos = int(np.argmax(per_pos))  # first maximum, matching the loop's strict >
    best_gain = float(per_pos[pos])
    if not np.isfinite(best_gain):
        return -1.0, 0.0, True
    thr = 0.5 * (values[pos] + values[pos + 1])
    return best_gain, float(thr), bool(take_left[pos])


def scan_split(values, grads, hess, g_miss, h_miss, lam, g_total, h_total):
    """Best (gain, threshold, missing_left) for one feature at one node.

    `values` must be sorted ascending; `grads`/`hess` in the same order.
    Returns gain = -1.0 when no split separates two distinct values.
    """
    if values.shape[0] < 2:
        return -1.0, 0.0, True
    if _DISABLE:
        return _scan_split_np(values, grads, hess, g_miss, h_miss, lam, g_total, h_total)
    return _scan_split_nb(values, grads, hess, g_miss, h_miss, lam, g_total, h_total)
