"""Seat-inventory control simulation comparing two forecast pipelines.

Class-level demand is forecast two ways: a Holt (double exponential
smoothing) time-series baseline per OD, and a model roll-up that sums
predicted purchase probabilities over candidate itineraries for covered ODs
(falling back to the time-series forecast elsewhere). Each forecast feeds an
EMSR-b booking-limit policy for a single flight; stochastic arrival streams
are replayed against both policies with common random numbers, with and
without downsell behavior.

Classes are numbered 1 (most expensive) to 12 (cheapest); fare brands
partition them as {1-3}, {4-8}, {9-12}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import norm

__all__ = [
    "N_CLASSES",
    "FARE_BRANDS",
    "FareLadder",
    "DemandMix",
    "OdMarket",
    "SimScenario",
    "Policy",
    "Request",
    "des_forecast",
    "model_rollup_forecast",
    "allocate_to_classes",
    "aggregate_class_forecasts",
    "optimize_policy",
    "generate_arrivals",
    "replay",
    "compare_policies",
    "ComparisonReport",
]

N_CLASSES = 12
# fare brand -> class indices (1-based)
FARE_BRANDS = {1: (1, 2, 3), 2: (4, 5, 6, 7, 8), 3: (9, 10, 11, 12)}
_BRAND_OF_CLASS = {c: b for b, classes in FARE_BRANDS.items() for c in classes}

# Arrival-order tendency: with this probability a request's arrival time is
# drawn from a brand-skewed distribution (cheap brands early), else uniform.
CHEAP_EARLY_PROB = 0.7
_BRAND_BETA = {1: (2.0, 1.0), 2: (1.0, 1.0), 3: (1.0, 2.0)}


@dataclass(frozen=True)
class FareLadder:
    fares: tuple[float, ...]

    def __post_init__(self):
        if len(self.fares) != N_CLASSES:
            raise ValueError(f"need {N_CLASSES} fares")
        if any(a < b for a, b in zip(self.fares, self.fares[1:])):
            raise ValueError("fares must be non-increasing from class 1 to 12")

    def fare(self, cls: int) -> float:
        return self.fares[cls - 1]


@dataclass(frozen=True)
class DemandMix:
    """Fare-brand demand shares; renormalized to sum 1 at construction."""

    shares: tuple[float, float, float]

    def __post_init__(self):
        if any(s < 0 for s in self.shares):
            raise ValueError("brand shares must be nonnegative")
        total = sum(self.shares)
        if total <= 0:
            raise ValueError("brand shares must not all be zero")
        object.__setattr__(self, "shares", tuple(s / total for s in self.shares))

    def brand_share(self, brand: int) -> float:
        return self.shares[brand - 1]


@dataclass
class OdMarket:
    name: str
    ladder: FareLadder
    mix: DemandMix
    mean_demand: float
    history: list[float]          # per-departure-day demand series for Holt
    covered: bool = False         # does a trained itinerary model cover this OD


@dataclass
class SimScenario:
    capacity: int
    ods: list[OdMarket]
    demand_factor_mean: float = 0.98
    demand_factor_sd: float = 0.1
    n_reps: int = 500
    seed: int = 0
    demand_cv: float = 0.3
    holt_alpha: float = 0.3
    holt_beta: float = 0.1
    cheap_early_prob: float = CHEAP_EARLY_PROB
    # departure day whose displayed itineraries feed the model roll-up
    forecast_day: int | None = None

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.n_reps < 1:
            raise ValueError("n_reps must be >= 1")


@dataclass
class Policy:
    """Nested booking limits per class at the flight (leg) level.

    limits[k] is the maximum cumulative seats sellable once class k+1 opens
    (0-based index k = class k+1). protections[j] protects classes 1..j+1
    against lower classes. od_forecasts keeps the per-OD class contributions
    for reporting.
    """

    limits: tuple[float, ...]
    protections: tuple[float, ...]
    od_forecasts: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def open_class(self, cls: int, sold: int) -> bool:
        return sold < self.limits[cls - 1]


def des_forecast(history: Sequence[float], alpha: float, beta: float) -> float:
    """One-step-ahead Holt linear-trend forecast, floored at zero.

    level_t = a*y_t + (1-a)(level + trend); trend_t = b*(level_t - level) +
    (1-b)*trend; initialized with level = y_0, trend = y_1 - y_0.
    """
    if len(history) < 2:
        raise ValueError("need at least 2 history points")
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise ValueError("alpha and beta must lie in (0, 1)")
    level = float(history[0])
    trend = float(history[1]) - float(history[0])
    for y in history[1:]:
        prev_level = level
        level = alpha * float(y) + (1 - alpha) * (level + trend)
        trend = beta * (level - prev_level) + (1 - beta) * trend
    return max(0.0, level + trend)


def allocate_to_classes(od_demand: float, mix: DemandMix) -> tuple[float, ...]:
    """Spread OD demand over classes: brand share, uniform within brand."""
    out = [0.0] * N_CLASSES
    for brand, classes in FARE_BRANDS.items():
        per_class = od_demand * mix.brand_share(brand) / len(classes)
        for c in classes:
            out[c - 1] = per_class
    return tuple(out)


def model_rollup_forecast(probabilities: Sequence[float], mix: DemandMix) -> tuple[float, ...]:
    """Class-level expected demand from per-itinerary purchase probabilities.

    Expected OD demand is the sum of probabilities (linearity of
    expectation), allocated to classes via the brand mix.
    """
    return allocate_to_classes(float(np.sum(probabilities)), mix)


def _od_class_forecasts(
    scenario: SimScenario,
    rollup_probs: Mapping[str, Sequence[float]] | None,
) -> dict[str, tuple[float, ...]]:
    """Per-OD class forecasts: model roll-up where covered, Holt elsewhere."""
    out = {}
    for od in scenario.ods:
        if rollup_probs is not None and od.covered:
            if od.name not in rollup_probs:
                raise ValueError(f"missing model probabilities for covered OD {od.name}")
            out[od.name] = model_rollup_forecast(rollup_probs[od.name], od.mix)
        else:
            total = des_forecast(od.history, scenario.holt_alpha, scenario.holt_beta)
            out[od.name] = allocate_to_classes(total, od.mix)
    return out


def aggregate_class_forecasts(
    scenario: SimScenario,
    rollup_probs: Mapping[str, Sequence[float]] | None = None,
) -> tuple[np.ndarray, np.ndarray, dict[str, tuple[float, ...]]]:
    """(class demand means, class fares, per-OD forecasts) for the leg.

    Class fares are demand-weighted averages over the ODs crossing the
    flight, so EMSR-b sees one 12-class ladder.
    """
    per_od = _od_class_forecasts(scenario, rollup_probs)
    means = np.zeros(N_CLASSES)
    fare_mass = np.zeros(N_CLASSES)
    for od in scenario.ods:
        fc = per_od[od.name]
        for c in range(N_CLASSES):
            means[c] += fc[c]
            fare_mass[c] += fc[c] * od.ladder.fare(c + 1)
    fares = np.empty(N_CLASSES)
    for c in range(N_CLASSES):
        if means[c] > 0:
            fares[c] = fare_mass[c] / means[c]
        else:
            fares[c] = float(np.mean([od.ladder.fare(c + 1) for od in scenario.ods]))
    return means, fares, per_od


def optimize_policy(
    class_means: np.ndarray,
    class_fares: np.ndarray,
    capacity: int,
    demand_cv: float = 0.3,
    od_forecasts: dict[str, tuple[float, ...]] | None = None,
) -> Policy:
    """EMSR-b nested protection levels under Gaussian class demand.

    For each class j, classes 1..j aggregate into a virtual class with summed
    mean/variance and demand-weighted average fare f_bar; the protection y_j
    solves P(S_j > y_j) = f_{j+1} / f_bar (Littlewood on the aggregate).
    Booking limits are capacity minus protection, clamped and nested.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    fares = np.asarray(class_fares, dtype=float)
    if any(fares[i] < fares[i + 1] for i in range(len(fares) - 1)):
        raise ValueError("class fares must be non-increasing")
    means = np.asarray(class_means, dtype=float)
    sds = demand_cv * means

    protections = np.zeros(N_CLASSES - 1)
    for j in range(1, N_CLASSES):  # protect classes 1..j against class j+1
        mu = means[:j].sum()
        sd = math.sqrt(float((sds[:j] ** 2).sum()))
        if mu <= 0:
            protections[j - 1] = 0.0
            continue
        f_bar = float((means[:j] * fares[:j]).sum() / mu)
        ratio = fares[j] / f_bar
        if ratio >= 1.0:
            y = 0.0
        elif ratio <= 0.0:
            y = float(capacity)
        elif sd == 0:
            y = mu
        else:
            y = float(norm.ppf(1.0 - ratio, loc=mu, scale=sd))
        protections[j - 1] = min(max(y, 0.0), float(capacity))
    protections = np.maximum.accumulate(protections)

    limits = [float(capacity)]
    limits.extend(float(capacity) - p for p in protections)
    return Policy(
        limits=tuple(limits),
        protections=tuple(protections),
        od_forecasts=dict(od_forecasts or {}),
    )


@dataclass(frozen=True)
class Request:
    time: float
    od: str
    willingness_class: int


def generate_arrivals(scenario: SimScenario, rep_seed: int) -> list[Request]:
    """One replication's ordered request stream.

    Volume is round(capacity * max(0, N(demand_factor_mean, sd))); each
    request draws an OD proportional to OD demand weights and a willingness
    class from the OD's brand mix (uniform within brand). Cheap fare brands
    tend to arrive earlier (skewed arrival-time draw with probability
    cheap_early_prob).
    """
    rng = np.random.default_rng(rep_seed)
    factor = max(0.0, rng.normal(scenario.demand_factor_mean, scenario.demand_factor_sd))
    volume = int(round(scenario.capacity * factor))
    if volume == 0:
        return []

    od_names = [od.name for od in scenario.ods]
    weights = np.array([od.mean_demand for od in scenario.ods], dtype=float)
    weights = weights / weights.sum()
    od_idx = rng.choice(len(od_names), size=volume, p=weights)

    requests = []
    for i in range(volume):
        od = scenario.ods[od_idx[i]]
        brand = 1 + rng.choice(3, p=np.array(od.mix.shares))
        cls = int(rng.choice(FARE_BRANDS[brand]))
        if rng.random() < scenario.cheap_early_prob:
            a, b = _BRAND_BETA[brand]
            t = float(rng.beta(a, b))
        else:
            t = float(rng.random())
        requests.append(Request(time=t, od=od.name, willingness_class=cls))
    requests.sort(key=lambda r: r.time)
    return requests


def replay(
    requests: Sequence[Request],
    policy: Policy,
    ladders: Mapping[str, FareLadder],
    capacity: int,
    downsell: bool,
) -> tuple[int, float]:
    """Accept requests against nested limits; returns (bookings, revenue).

    With downsell, a customer books the cheapest open class at or below her
    willingness class's fare (highest open class index >= willingness);
    without, she books exactly her class or is lost.
    """
    sold = 0
    revenue = 0.0
    for req in requests:
        if sold >= capacity:
            break
        k = req.willingness_class
        if downsell:
            booked = None
            for cls in range(N_CLASSES, k - 1, -1):  # cheapest first
                if policy.open_class(cls, sold):
                    booked = cls
                    break
            if booked is None:
                continue
        else:
            if not policy.open_class(k, sold):
                continue
            booked = k
        sold += 1
        revenue += ladders[req.od].fare(booked)
    return sold, revenue


@dataclass
class ComparisonReport:
    """Table-shaped summary: rows (downsell no/yes) x (std, xgb, % gain)."""

    mean_revenue: dict[tuple[bool, str], float]
    gain_pct: dict[bool, float]
    gain_ci95: dict[bool, tuple[float, float]]
    per_rep: dict[tuple[bool, str], list[float]]

    def to_csv(self, path: str | Path, header_comment: str | None = None) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            writer = csv.writer(fh)
            writer.writerow(["downsell", "std", "xgb", "gain_pct", "gain_ci_low", "gain_ci_high"])
            for ds in (False, True):
                lo, hi = self.gain_ci95[ds]
                writer.writerow([
                    "Yes" if ds else "No",
                    f"{self.mean_revenue[(ds, 'std')]:.2f}",
                    f"{self.mean_revenue[(ds, 'xgb')]:.2f}",
                    f"{self.gain_pct[ds]:.2f}",
                    f"{lo:.2f}",
                    f"{hi:.2f}",
                ])

    def write_replication_log(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "downsell", "method", "revenue"])
            for (ds, method), revs in sorted(self.per_rep.items()):
                for rep, rev in enumerate(revs):
                    writer.writerow([rep, "Yes" if ds else "No", method, f"{rev:.2f}"])


def compare_policies(
    scenario: SimScenario,
    policy_std: Policy,
    policy_xgb: Policy,
) -> ComparisonReport:
    """Replay both policies on identical arrival streams (common random
    numbers) for both downsell settings; paired 95% CI on the revenue gap."""
    ladders = {od.name: od.ladder for od in scenario.ods}
    seeds = np.random.SeedSequence(scenario.seed).spawn(scenario.n_reps)
    per_rep: dict[tuple[bool, str], list[float]] = {
        (ds, m): [] for ds in (False, True) for m in ("std", "xgb")
    }
    for rep_seq in seeds:
        rep_seed = rep_seq.generate_state(1)[0]
        arrivals = generate_arrivals(scenario, int(rep_seed))
        for ds in (False, True):
            for method, policy in (("std", policy_std), ("xgb", policy_xgb)):
                sold, revenue = replay(arrivals, policy, ladders, scenario.capacity, ds)
                assert sold <= scenario.capacity
                per_rep[(ds, method)].append(revenue)

    mean_revenue = {key: float(np.mean(revs)) for key, revs in per_rep.items()}
    gain_pct = {}
    gain_ci = {}
    for ds in (False, True):
        std = np.array(per_rep[(ds, "std")])
        xgb = np.array(per_rep[(ds, "xgb")])
        diff = xgb - std
        base = std.mean()
        gain_pct[ds] = float(diff.mean() / base * 100.0) if base > 0 else 0.0
        se = float(diff.std(ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else 0.0
        gain_ci[ds] = (float(diff.mean() - 1.96 * se), float(diff.mean() + 1.96 * se))
    return ComparisonReport(
        mean_revenue=mean_revenue, gain_pct=gain_pct, gain_ci95=gain_ci, per_rep=per_rep
    )
