"""Shared fixtures: the standard ten-market corpus built once per session."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest

from farecast import gbt, logit, synth
from farecast.features import (
    FeatureTable,
    airline_widebody_flags,
    assemble_feature_vectors,
    build_airline_aggregates,
)
from farecast.ingest import filter_tweets
from farecast.sentiment import load_default_lexicon
from farecast.simulate import SimScenario


@dataclass
class Pipeline:
    """Everything the end-to-end tests need, built once."""

    markets: dict[str, synth.MarketData]
    scenario: SimScenario
    tables: dict[str, FeatureTable] = field(default_factory=dict)
    models: dict[str, gbt.TreeEnsemble] = field(default_factory=dict)
    baselines: dict[str, logit.LogitModel] = field(default_factory=dict)
    holdouts: dict[str, np.ndarray] = field(default_factory=dict)
    train_seconds: dict[str, float] = field(default_factory=dict)


@pytest.fixture(scope="session")
def pipeline() -> Pipeline:
    markets, scenario = synth.standard_fixture()
    pipe = Pipeline(markets=markets, scenario=scenario)
    lexicon = load_default_lexicon()
    for od, data in markets.items():
        aggregates = build_airline_aggregates(
            data.reviews, filter_tweets(data.tweets), data.safety, data.fleet, lexicon
        )
        table = assemble_feature_vectors(
            data.bookings, data.fares, aggregates,
            widebody=airline_widebody_flags(data.fleet),
        )
        pipe.tables[od] = table
        X, missing, names = table.model_matrix()
        y = table.labels()
        days = table.column("dep_day_id")
        holdout = gbt.holdout_split_by_day(days, 0.2)
        pipe.holdouts[od] = holdout
        tr = ~holdout
        t0 = time.perf_counter()
        pipe.models[od] = gbt.train(
            X[tr], y[tr], gbt.GbtParams(seed=1), feature_names=names, missing=missing[tr]
        )
        pipe.train_seconds[od] = time.perf_counter() - t0
        pipe.baselines[od] = logit.fit_logit(
            X[tr], y[tr], feature_names=names, missing=missing[tr]
        )
    return pipe
