"""Command-line pipeline: synth -> features -> train -> evaluate / explain / simulate.

Each subcommand reads the previous stage's outputs from disk, so stages can
be rerun independently. Reruns with identical inputs produce byte-identical
outputs (all randomness is seeded, writes are atomic). Missing prerequisites
fail with a message naming the command to run first.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import __version__, evaluate, explain, gbt, logit, sentiment, synth
from .config import (
    DATASET_FILES,
    RunConfig,
    atomic_write_text,
    config_hash,
    load_config,
    read_scenario,
    write_scenario,
)
from .features import (
    FeatureTable,
    airline_widebody_flags,
    assemble_feature_vectors,
    build_airline_aggregates,
)
from .ingest import ParseError, filter_tweets, parse_dataset, serialize_dataset
from .simulate import aggregate_class_forecasts, compare_policies, optimize_policy


class CliError(Exception):
    """User-facing failure; printed without a traceback, exit status 2."""


def _stamp(cfg: RunConfig) -> str:
    return f"config_hash={config_hash(cfg)} seed={cfg.seed}"


def _discover_ods(root: Path) -> list[str]:
    return sorted(p.name for p in root.iterdir() if (p / "bookings.csv").is_file())


def _select_ods(cfg: RunConfig, root: Path, stage_hint: str) -> list[str]:
    if not root.is_dir():
        raise CliError(f"directory {root} not found; run `farecast {stage_hint}` first")
    ods = cfg.ods or _discover_ods(root)
    if not ods:
        raise CliError(f"no OD markets under {root}; run `farecast {stage_hint}` first")
    return ods


def _serialize_to_text(records, schema: str) -> str:
    import csv as _csv

    from .ingest import schema_columns, _format_value  # noqa: PLC0415

    buf = io.StringIO()
    writer = _csv.writer(buf)
    writer.writerow(schema_columns(schema))
    for rec in records:
        writer.writerow([_format_value(getattr(rec, col)) for col in schema_columns(schema)])
    return buf.getvalue()


def cmd_synth(args, cfg: RunConfig) -> int:
    seed = args.seed if args.seed is not None else cfg.seed
    out = Path(args.out or cfg.data_dir)
    markets, scenario = synth.standard_fixture(seed=seed)
    for od, data in markets.items():
        od_dir = out / od
        payloads = {
            "bookings": data.bookings,
            "fares": data.fares,
            "reviews": data.reviews,
            "tweets": data.tweets,
            "safety": data.safety,
            "fleet": data.fleet,
        }
        for schema, records in payloads.items():
            atomic_write_text(od_dir / DATASET_FILES[schema], _serialize_to_text(records, schema))
    write_scenario(scenario, out / "scenario.ini")
    n_rows = sum(len(m.bookings) for m in markets.values())
    print(f"wrote {len(markets)} OD markets ({n_rows} labeled itineraries) to {out}")
    print(f"wrote flight scenario to {out / 'scenario.ini'}")
    return 0


def _load_market(od_dir: Path, od: str):
    datasets = {}
    for schema, fname in DATASET_FILES.items():
        path = od_dir / fname
        if not path.is_file():
            raise CliError(f"missing {path}; run `farecast synth` (or supply data) first")
        result = parse_dataset(path, schema)
        if result.n_rejected:
            print(f"[{od}] {schema}: rejected {result.n_rejected} rows", file=sys.stderr)
        datasets[schema] = result.records
    return datasets


def cmd_features(args, cfg: RunConfig) -> int:
    data_root = Path(args.data or cfg.data_dir)
    out_root = Path(args.out or cfg.out_dir)
    ods = args.od or _select_ods(cfg, data_root, "synth")
    if cfg.lexicon_path:
        lex_records = parse_dataset(cfg.lexicon_path, "lexicon").records
        lexicon = {r.word: r.score for r in lex_records}
    else:
        lexicon = sentiment.load_default_lexicon()
    for od in ods:
        datasets = _load_market(data_root / od, od)
        tweets = filter_tweets(datasets["tweets"])
        aggregates = build_airline_aggregates(
            datasets["reviews"], tweets, datasets["safety"], datasets["fleet"], lexicon
        )
        widebody = airline_widebody_flags(datasets["fleet"])
        table = assemble_feature_vectors(
            datasets["bookings"], datasets["fares"], aggregates, widebody=widebody
        )
        out_dir = out_root / od
        buf = io.StringIO()
        _write_feature_csv(table, buf, _stamp(cfg))
        atomic_write_text(out_dir / "features.csv", buf.getvalue())
        print(f"[{od}] features: {len(table)} rows -> {out_dir / 'features.csv'}")
    return 0


def _write_feature_csv(table: FeatureTable, fh, comment: str) -> None:
    import csv as _csv
    import re as _re

    from .features import _fmt  # noqa: PLC0415

    fh.write(f"# {comment}\n")
    writer = _csv.writer(fh)
    writer.writerow(["od"] + [_re.sub(r"_xx$", "_zz", c) for c in table.columns])
    for od, row in zip(table.ods, table.values):
        writer.writerow([od] + [_fmt(v) for v in row])


def _load_features(features_root: Path, od: str) -> FeatureTable:
    path = features_root / od / "features.csv"
    if not path.is_file():
        raise CliError(f"missing {path}; run `farecast features` first")
    return FeatureTable.from_csv(path)


def _load_models(models_root: Path, od: str):
    gbt_path = models_root / od / "gbt.json"
    logit_path = models_root / od / "logit.json"
    if not gbt_path.is_file() or not logit_path.is_file():
        raise CliError(f"missing model files under {models_root / od}; run `farecast train` first")
    model = gbt.TreeEnsemble.from_json(gbt_path.read_text(encoding="utf-8"))
    baseline = logit.LogitModel.from_json(logit_path.read_text(encoding="utf-8"))
    return model, baseline


def _train_one(od: str, table: FeatureTable, cfg: RunConfig, do_grid: bool):
    X, missing, names = table.model_matrix()
    y = table.labels()
    days = table.column("dep_day_id")
    holdout = gbt.holdout_split_by_day(days, cfg.holdout_frac)
    tr, va = ~holdout, holdout
    params = cfg.gbt
    if do_grid:
        result = gbt.grid_search(X[tr], y[tr], days[tr], base_params=params, missing=missing[tr])
        params = result.best_params
    model = gbt.train(
        X[tr], y[tr], params, feature_names=names, missing=missing[tr],
        eval_set=(X[va], y[va], missing[va]) if va.any() else None,
    )
    baseline = logit.fit_logit(X[tr], y[tr], feature_names=names, missing=missing[tr])
    return model, baseline, holdout


def cmd_train(args, cfg: RunConfig) -> int:
    features_root = Path(args.features or cfg.out_dir)
    out_root = Path(args.out or cfg.out_dir)
    ods = args.od or _select_ods_from_features(cfg, features_root)
    for od in ods:
        table = _load_features(features_root, od)
        model, baseline, holdout = _train_one(od, table, cfg, args.grid)
        od_dir = out_root / od
        atomic_write_text(od_dir / "gbt.json", model.to_json() + "\n")
        atomic_write_text(od_dir / "logit.json", baseline.to_json() + "\n")
        gains = ", ".join(f"{k}={v:.3f}" for k, v in list(model.gain_table.items())[:3])
        print(f"[{od}] trained gbt ({model.params.n_trees} trees) + logit baseline; top gains: {gains}")
    return 0


def _select_ods_from_features(cfg: RunConfig, root: Path) -> list[str]:
    if not root.is_dir():
        raise CliError(f"directory {root} not found; run `farecast features` first")
    ods = cfg.ods or sorted(p.name for p in root.iterdir() if (p / "features.csv").is_file())
    if not ods:
        raise CliError(f"no feature tables under {root}; run `farecast features` first")
    return ods


def cmd_evaluate(args, cfg: RunConfig) -> int:
    features_root = Path(args.features or cfg.out_dir)
    models_root = Path(args.models or cfg.out_dir)
    out_path = Path(args.out or (Path(cfg.out_dir) / "comparison.csv"))
    ods = args.od or _select_ods_from_features(cfg, features_root)
    rows = []
    for od in ods:
        table = _load_features(features_root, od)
        model, baseline, = _load_models(models_root, od)
        X, missing, _ = table.model_matrix()
        y = table.labels().astype(bool)
        days = table.column("dep_day_id")
        va = gbt.holdout_split_by_day(days, cfg.holdout_frac)
        pred_l = logit.predict_logit_label(baseline, X[va], missing[va]).astype(bool)
        pred_g = gbt.predict_label(model, X[va], missing[va]).astype(bool)
        tri_l = evaluate.confusion(y[va], pred_l)
        tri_g = evaluate.confusion(y[va], pred_g)
        rows.append((od, "logit", tri_l))
        rows.append((od, "xgb", tri_g))
        winners = evaluate.compare_models(tri_l, tri_g)
        def _fmt_tri(t):
            return (f"fn={t.fn_share:.2f} fp={t.fp_share:.2f} tp={t.tp_share:.2f}"
                    if t.defined else "undefined")
        print(f"[{od}] logit: {_fmt_tri(tri_l)} | xgb: {_fmt_tri(tri_g)} | winners: {winners}")
    buf = io.StringIO()
    _write_comparison(buf, rows, _stamp(cfg))
    atomic_write_text(out_path, buf.getvalue())
    print(f"wrote comparison table to {out_path}")
    return 0


def _write_comparison(fh, rows, comment: str) -> None:
    import csv as _csv

    fh.write(f"# {comment}\n")
    writer = _csv.writer(fh)
    writer.writerow(["od", "method", "fn", "fp", "tp"])
    for od, method, triple in rows:
        if triple.defined:
            writer.writerow([od, method, f"{triple.fn_share:.4f}",
                             f"{triple.fp_share:.4f}", f"{triple.tp_share:.4f}"])
        else:
            writer.writerow([od, method, "undefined", "undefined", "undefined"])


def cmd_explain(args, cfg: RunConfig) -> int:
    features_root = Path(args.features or cfg.out_dir)
    models_root = Path(args.models or cfg.out_dir)
    table = _load_features(features_root, args.od)
    model, _ = _load_models(models_root, args.od)
    X, missing, _ = table.model_matrix()
    if not (0 <= args.row < len(table)):
        raise CliError(f"row {args.row} out of range (0..{len(table) - 1})")
    exp = explain.explain_prediction(model, X[args.row], missing[args.row])
    print(explain.render_waterfall(exp, max_features=args.top))
    if args.out:
        buf = io.StringIO()
        import csv as _csv

        buf.write(f"# {_stamp(cfg)}\n")
        writer = _csv.writer(buf)
        writer.writerow(["feature", "log_odds", "cumulative_probability"])
        for name, lo, p in explain._trace(exp):  # noqa: SLF001 - shared renderer
            writer.writerow([name, f"{lo:.10g}", f"{p:.10g}"])
        atomic_write_text(args.out, buf.getvalue())
        print(f"wrote waterfall data to {args.out}")
    return 0


def cmd_simulate(args, cfg: RunConfig) -> int:
    scenario_path = args.scenario or cfg.scenario_path or str(Path(cfg.data_dir) / "scenario.ini")
    if not Path(scenario_path).is_file():
        raise CliError(f"scenario file {scenario_path} not found; run `farecast synth` first")
    scenario = read_scenario(scenario_path)
    features_root = Path(args.features or cfg.out_dir)
    models_root = Path(args.models or cfg.out_dir)
    out_root = Path(args.out or cfg.out_dir)

    rollup_probs = {}
    for od in scenario.ods:
        if not od.covered:
            continue
        table = _load_features(features_root, od.name)
        model, _ = _load_models(models_root, od.name)
        X, missing, _ = table.model_matrix()
        if scenario.forecast_day is not None:
            sel = table.column("dep_day_id") == scenario.forecast_day
        else:
            sel = np.ones(len(table), dtype=bool)
        if not sel.any():
            raise CliError(f"no itineraries for OD {od.name} on forecast day")
        rollup_probs[od.name] = gbt.predict_proba(model, X[sel], missing[sel])

    means_std, fares_std, per_od_std = aggregate_class_forecasts(scenario, None)
    means_xgb, fares_xgb, per_od_xgb = aggregate_class_forecasts(scenario, rollup_probs)
    policy_std = optimize_policy(means_std, fares_std, scenario.capacity,
                                 scenario.demand_cv, per_od_std)
    policy_xgb = optimize_policy(means_xgb, fares_xgb, scenario.capacity,
                                 scenario.demand_cv, per_od_xgb)
    report = compare_policies(scenario, policy_std, policy_xgb)

    out_root.mkdir(parents=True, exist_ok=True)
    report.to_csv(out_root / "simulation.csv", header_comment=_stamp(cfg))
    report.write_replication_log(out_root / "replications.csv")
    for ds in (False, True):
        lo, hi = report.gain_ci95[ds]
        print(
            f"downsell={'yes' if ds else 'no '}  std={report.mean_revenue[(ds, 'std')]:.0f}  "
            f"xgb={report.mean_revenue[(ds, 'xgb')]:.0f}  "
            f"gain={report.gain_pct[ds]:+.2f}%  CI95=[{lo:.0f}, {hi:.0f}]"
        )
    print(f"wrote simulation report to {out_root / 'simulation.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="farecast",
        description="Itinerary purchase prediction and seat-inventory simulation pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="INI run-config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic ten-market corpus and flight scenario")
    p.add_argument("--out", help="output data directory")
    p.add_argument("--seed", type=int, help="override the global seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="assemble feature tables from the six raw datasets")
    p.add_argument("--data", help="data directory (one subdirectory per OD)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--od", action="append", help="restrict to one OD (repeatable)")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the boosted-tree model and logistic baseline per OD")
    p.add_argument("--features", help="directory with per-OD features.csv")
    p.add_argument("--out", help="output directory for model files")
    p.add_argument("--od", action="append")
    p.add_argument("--grid", action="store_true", help="hyperparameter grid search before the final fit")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="holdout confusion comparison of both models")
    p.add_argument("--features", help="directory with per-OD features.csv")
    p.add_argument("--models", help="directory with per-OD model files")
    p.add_argument("--out", help="comparison CSV path")
    p.add_argument("--od", action="append")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="additive waterfall for one itinerary's prediction")
    p.add_argument("--features", help="directory with per-OD features.csv")
    p.add_argument("--models", help="directory with per-OD model files")
    p.add_argument("--od", required=True)
    p.add_argument("--row", type=int, required=True, help="row index within the OD's feature table")
    p.add_argument("--top", type=int, default=None, help="show only the top-N contributions")
    p.add_argument("--out", help="optional waterfall plot-data CSV")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("simulate", help="EMSR-b revenue comparison of both forecast pipelines")
    p.add_argument("--scenario", help="scenario INI file")
    p.add_argument("--features", help="directory with per-OD features.csv")
    p.add_argument("--models", help="directory with per-OD model files")
    p.add_argument("--out", help="output directory for the report")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (CliError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
