"""Command-line front end.

Exit codes: 0 success, 2 input/validation error, 3 numerical failure,
4 infeasible scenario.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .diagnostics import DiagnosticFailure, anderson_darling_gumbel, mann_kendall, quantile_plot_data, standardize
from .exceptions import ConvergenceError, DataValidationError, ExtremesError, InfeasibleError
from .extremal import theta_for_windowed
from .fitting import FitResult, fit_mle
from .functionals import BLOCK_MAXIMA_COLUMNS, build_block_maxima_table, read_block_maxima_csv
from .gev import COEF_NAMES
from .ingest import (
    Dataset,
    load_dataset,
    parse_soi_csv,
    parse_station_meta,
    quality_filter,
    write_daily_csv,
    write_soi_csv,
    write_station_meta,
    yearly_soi_table,
)
from .model_select import build_ladder, select
from .returns import ReturnSpec, aggregated_quantile, shape_drift_report, simulate_soi
from .synthetic import ladder_model, synthetic_dataset

logger = logging.getLogger("multiday_extremes")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4

EI_COLUMNS = ("station_id", "k", "quantile", "theta", "cluster_size", "n_exceedances", "estimator_form")
SELECTION_COLUMNS = ("model", "k", "nll", "aic", "bic", "mk_stat", "mk_p", "ad_stat", "ad_p")
COEF_COLUMNS = ("k",) + COEF_NAMES
RL_COLUMNS = ("station_id", "k", "horizon_years", "p", "return_level_mm")
QQ_COLUMNS = ("theoretical", "empirical")
DRIFT_COLUMNS = ("k", "block_length", "n_blocks", "xi", "xi_se", "rel_error", "available", "flagged")


@dataclass
class RunConfig:
    daily_dir: Path | None = None
    stations: Path | None = None
    soi: Path | None = None
    ks: tuple = (1, 2, 3)
    quantile: float = 0.95
    model: str = "auto"
    out: Path = Path("out")
    seed: int = 0
    shape_tie: bool = False
    horizon: int | None = None
    p: tuple = (0.01,)
    full_precision: bool = False
    jobs: int = 1
    block_lengths: tuple = (365, 730)
    simulate: int | None = None
    written: list = field(default_factory=list)

    @property
    def float_format(self):
        return None if self.full_precision else "%.6g"


# --------------------------------------------------------------------------- output helpers


def _num(x, cfg: RunConfig):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return x if cfg.full_precision else float(f"{x:.6g}")
    return x


def emit_csv(df: pd.DataFrame, path: Path, header, cfg: RunConfig) -> Path:
    """Write ``df`` with exactly ``header`` as columns and verify the header on disk."""
    header = list(header)
    missing = [c for c in header if c not in df.columns]
    if missing:
        raise RuntimeError(f"{path.name}: frame lacks columns {missing}")
    path.parent.mkdir(parents=True, exist_ok=True)
    df.loc[:, header].to_csv(path, index=False, float_format=cfg.float_format, lineterminator="\n")
    with path.open(encoding="utf-8") as fh:
        if fh.readline().rstrip("\n").split(",") != header:
            raise RuntimeError(f"{path}: header self-check failed")
    cfg.written.append(path.name)
    return path


def emit_json(obj, path: Path, cfg: RunConfig) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    cfg.written.append(path.name)
    return path


def write_manifest(cfg: RunConfig, complete: bool, error: str | None = None) -> None:
    manifest = {"complete": complete, "files": sorted(cfg.written), "version": __version__}
    if error:
        manifest["error"] = error
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------- stages


def _load(cfg: RunConfig) -> Dataset:
    for name in ("daily_dir", "stations", "soi"):
        if getattr(cfg, name) is None:
            raise DataValidationError(f"--{name.replace('_', '-')} is required")
    return load_dataset(cfg.daily_dir, cfg.stations, cfg.soi)


def block_maxima_stage(ds: Dataset, cfg: RunConfig) -> pd.DataFrame:
    return build_block_maxima_table(
        ds.series.values(), ds.stations, yearly_soi_table(ds.soi), cfg.ks, ds.admissible
    )


def ei_stage(ds: Dataset, cfg: RunConfig, k: int, form: str = "standard") -> pd.DataFrame:
    rows = []
    for sid, s in ds.series.items():
        try:
            est = theta_for_windowed(s, k, cfg.quantile, form)
            rows.append((sid, k, cfg.quantile, est.theta, est.cluster_size, est.n_exceedances, est.estimator_form))
        except InfeasibleError as exc:
            logger.warning("%s k=%d: %s", sid, k, exc)
            rows.append((sid, k, cfg.quantile, math.nan, math.nan, 0, "infeasible"))
    return pd.DataFrame(rows, columns=list(EI_COLUMNS))


def _diagnostic_columns(table, fit, model_id):
    try:
        sample = standardize(table, fit, model_id)
        mk = mann_kendall(sample)
        ad = anderson_darling_gumbel(sample)
        return mk.statistic, mk.p_value, ad.statistic, ad.p_value
    except (DiagnosticFailure, ValueError) as exc:
        logger.warning("model %s: diagnostics unavailable (%s)", model_id, exc)
        return (math.nan,) * 4


def selection_frame(report, table, k) -> pd.DataFrame:
    rows = []
    for s in report.scores:
        diag = _diagnostic_columns(table, s.fit, s.model_id) if s.converged else (math.nan,) * 4
        rows.append((s.model_id, k, s.nll, s.aic, s.bic) + diag)
    return pd.DataFrame(rows, columns=list(SELECTION_COLUMNS))


def _select_for_k(args):
    table, k, seed = args
    return k, select(table, build_ladder(), seed=seed)


def _fit_frames(fit: FitResult, k: int):
    coef = pd.DataFrame([fit.coefficient_row(k)], columns=list(COEF_COLUMNS))
    se = pd.DataFrame([fit.std_error_row(k)], columns=list(COEF_COLUMNS))
    return coef, se


def diagnostics_summary(table, fit, model_id, k) -> tuple[dict, pd.DataFrame]:
    sample = standardize(table, fit, model_id)
    ad = anderson_darling_gumbel(sample)
    mk = mann_kendall(sample)
    qq = quantile_plot_data(sample).to_frame()
    summary = {
        "k": k,
        "model": model_id,
        "n": int(sample.values.size),
        "n_excluded": sample.n_excluded,
        "anderson_darling": {"statistic": ad.statistic, "p_value": ad.p_value, "clipped": ad.clipped},
        "mann_kendall": {"tau": mk.statistic, "p_value": mk.p_value},
    }
    return summary, qq


def _rounded(obj, cfg):
    if isinstance(obj, dict):
        return {k: _rounded(v, cfg) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v, cfg) for v in obj]
    return _num(obj, cfg)


def return_level_frame(fit: FitResult, ds_stations, scenario: pd.DataFrame, k: int, ps, station_ids=None) -> pd.DataFrame:
    rows = []
    ids = station_ids if station_ids is not None else sorted(ds_stations)
    for sid in ids:
        station = ds_stations[sid]
        for p in ps:
            level = aggregated_quantile(ReturnSpec(p, scenario), fit, station)
            rows.append((sid, k, len(scenario), p, level))
    return pd.DataFrame(rows, columns=list(RL_COLUMNS))


def historical_scenario(soi_by_year: dict, horizon: int, end_year: int | None = None) -> pd.DataFrame:
    years = sorted(soi_by_year)
    end = end_year if end_year is not None else years[-1]
    span = list(range(end - horizon + 1, end + 1))
    missing = [y for y in span if y not in soi_by_year]
    if missing:
        raise InfeasibleError(f"no complete SOI for scenario years {missing}")
    return pd.DataFrame({"year": span, "soi": [soi_by_year[y] for y in span]})


def run_pipeline(cfg: RunConfig) -> None:
    ds = _load(cfg)
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    table = block_maxima_stage(ds, cfg)
    tables = {k: table[table["k"] == k].reset_index(drop=True) for k in cfg.ks}
    for k in cfg.ks:
        emit_csv(tables[k], out / f"block_maxima_k{k}.csv", BLOCK_MAXIMA_COLUMNS, cfg)
        emit_csv(ei_stage(ds, cfg, k), out / f"extremal_index_k{k}.csv", EI_COLUMNS, cfg)

    jobs = [(tables[k], k, cfg.seed) for k in cfg.ks]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = dict(pool.map(_select_for_k, jobs))
    else:
        reports = dict(map(_select_for_k, jobs))

    chosen_fits = {}
    for k in cfg.ks:
        report = reports[k]
        emit_csv(selection_frame(report, tables[k], k), out / f"selection_k{k}.csv", SELECTION_COLUMNS, cfg)
        model_id = report.chosen if cfg.model == "auto" else int(cfg.model)
        if model_id is None:
            raise ConvergenceError(f"k={k}: no ladder model converged")
        fit = report.score(model_id).fit
        if not fit.converged:
            raise ConvergenceError(f"k={k}: model {model_id} did not converge ({fit.message})")
        if cfg.shape_tie and k != cfg.ks[0] and cfg.ks[0] in chosen_fits:
            fit = fit_mle(
                tables[k], fit.model.active, fit.model, fixed_xi=chosen_fits[cfg.ks[0]].model.xi, seed=cfg.seed
            )
        fit.meta.update({"k": k, "model_id": model_id})
        chosen_fits[k] = fit
        fit_path = out / f"fit_k{k}.txt"
        fit_path.write_text(fit.to_record(), encoding="utf-8")
        cfg.written.append(fit_path.name)
        coef, se = _fit_frames(fit, k)
        emit_csv(coef, out / f"coefficients_k{k}.csv", COEF_COLUMNS, cfg)
        emit_csv(se, out / f"standard_errors_k{k}.csv", COEF_COLUMNS, cfg)
        summary, qq = diagnostics_summary(tables[k], fit, model_id, k)
        emit_json(_rounded(summary, cfg), out / f"diagnostics_k{k}.json", cfg)
        emit_csv(qq, out / f"qq_k{k}.csv", QQ_COLUMNS, cfg)

    drift = shape_drift_report(list(ds.series.values()), max(cfg.ks), cfg.block_lengths, seed=cfg.seed)
    emit_csv(drift, out / "shape_drift.csv", DRIFT_COLUMNS, cfg)

    soi_by_year = yearly_soi_table(ds.soi)
    if cfg.horizon:
        scenario = historical_scenario(soi_by_year, cfg.horizon)
        for k in cfg.ks:
            rl = return_level_frame(chosen_fits[k], ds.stations, scenario, k, cfg.p, sorted(ds.series))
            emit_csv(rl, out / f"return_levels_k{k}.csv", RL_COLUMNS, cfg)
    if cfg.simulate:
        sim = simulate_soi(list(soi_by_year.values()), cfg.simulate, cfg.seed).to_frame()
        emit_csv(sim, out / "soi_scenario.csv", ("year", "soi"), cfg)
        for k in cfg.ks:
            rl = return_level_frame(chosen_fits[k], ds.stations, sim, k, cfg.p, sorted(ds.series))
            emit_csv(rl, out / f"scenario_return_levels_k{k}.csv", RL_COLUMNS, cfg)


# --------------------------------------------------------------------------- commands


def cmd_ingest(cfg: RunConfig, args) -> int:
    ds = _load(cfg)
    print(f"stations: {len(ds.series)}")
    soi_years = yearly_soi_table(ds.soi)
    print(f"soi: {len(ds.soi)} months, {len(soi_years)} complete years")
    for sid, s in ds.series.items():
        years = ds.admissible[sid]
        print(f"  {sid}: {len(s)} days from {s.start}, {len(years)} admissible years")
    return EXIT_OK


def cmd_functional(cfg: RunConfig, args) -> int:
    ds = _load(cfg)
    emit_csv(block_maxima_stage(ds, cfg), cfg.out / "block_maxima.csv", BLOCK_MAXIMA_COLUMNS, cfg)
    return EXIT_OK


def cmd_ei(cfg: RunConfig, args) -> int:
    ds = _load(cfg)
    frames = [ei_stage(ds, cfg, k, args.form) for k in cfg.ks]
    emit_csv(pd.concat(frames, ignore_index=True), cfg.out / "extremal_index.csv", EI_COLUMNS, cfg)
    return EXIT_OK


def _read_table(path) -> pd.DataFrame:
    if path is None:
        raise DataValidationError("--block-maxima is required")
    if not Path(path).exists():
        raise DataValidationError(f"input not found: {path}")
    return read_block_maxima_csv(path)


def _model_id(cfg: RunConfig) -> int:
    if cfg.model == "auto":
        raise DataValidationError("this command needs an explicit --model 0..4")
    mid = int(cfg.model)
    if mid not in build_ladder().ids:
        raise DataValidationError(f"unknown model {mid}")
    return mid


def cmd_fit(cfg: RunConfig, args) -> int:
    table = _read_table(args.block_maxima)
    mid = _model_id(cfg)
    for k in cfg.ks:
        sub = table[table["k"] == k].reset_index(drop=True)
        fit = fit_mle(sub, build_ladder().masks[mid], seed=cfg.seed)
        fit.meta.update({"k": k, "model_id": mid})
        (cfg.out).mkdir(parents=True, exist_ok=True)
        (cfg.out / f"fit_k{k}_m{mid}.txt").write_text(fit.to_record(), encoding="utf-8")
        coef, se = _fit_frames(fit, k)
        emit_csv(coef, cfg.out / f"coefficients_k{k}.csv", COEF_COLUMNS, cfg)
        emit_csv(se, cfg.out / f"standard_errors_k{k}.csv", COEF_COLUMNS, cfg)
        if not fit.converged:
            raise ConvergenceError(f"k={k}: {fit.message}")
    return EXIT_OK


def cmd_select(cfg: RunConfig, args) -> int:
    table = _read_table(args.block_maxima)
    for k in cfg.ks:
        sub = table[table["k"] == k].reset_index(drop=True)
        report = select(sub, build_ladder(), seed=cfg.seed)
        emit_csv(selection_frame(report, sub, k), cfg.out / f"selection_k{k}.csv", SELECTION_COLUMNS, cfg)
        print(f"k={k}: chosen model {report.chosen}")
    return EXIT_OK


def cmd_diagnose(cfg: RunConfig, args) -> int:
    table = _read_table(args.block_maxima)
    if args.fit is None or not Path(args.fit).exists():
        raise DataValidationError(f"fit record not found: {args.fit}")
    fit = FitResult.load(args.fit)
    k = int(fit.meta.get("k", cfg.ks[0]))
    sub = table[table["k"] == k].reset_index(drop=True)
    summary, qq = diagnostics_summary(sub, fit, fit.meta.get("model_id"), k)
    emit_json(_rounded(summary, cfg), cfg.out / f"diagnostics_k{k}.json", cfg)
    emit_csv(qq, cfg.out / f"qq_k{k}.csv", QQ_COLUMNS, cfg)
    return EXIT_OK


def _fit_and_stations(cfg, args):
    if args.fit is None or not Path(args.fit).exists():
        raise DataValidationError(f"fit record not found: {args.fit}")
    if cfg.stations is None or not Path(cfg.stations).exists():
        raise DataValidationError(f"station metadata not found: {cfg.stations}")
    return FitResult.load(args.fit), parse_station_meta(cfg.stations)


def cmd_rl(cfg: RunConfig, args) -> int:
    fit, stations = _fit_and_stations(cfg, args)
    if cfg.soi is None:
        raise DataValidationError("--soi is required")
    if not cfg.horizon:
        raise DataValidationError("--horizon is required")
    scenario = historical_scenario(yearly_soi_table(parse_soi_csv(cfg.soi)), cfg.horizon, args.end_year)
    k = int(fit.meta.get("k", cfg.ks[0]))
    emit_csv(return_level_frame(fit, stations, scenario, k, cfg.p), cfg.out / "return_levels.csv", RL_COLUMNS, cfg)
    return EXIT_OK


def cmd_scenario(cfg: RunConfig, args) -> int:
    fit, stations = _fit_and_stations(cfg, args)
    if args.scenario:
        scenario = pd.read_csv(args.scenario)
        if list(scenario.columns) != ["year", "soi"]:
            raise DataValidationError(f"{args.scenario}: expected header 'year,soi'")
    elif cfg.simulate:
        if cfg.soi is None:
            raise DataValidationError("--simulate needs --soi for the historical distribution")
        history = list(yearly_soi_table(parse_soi_csv(cfg.soi)).values())
        scenario = simulate_soi(history, cfg.simulate, cfg.seed).to_frame()
        emit_csv(scenario, cfg.out / "soi_scenario.csv", ("year", "soi"), cfg)
    else:
        raise DataValidationError("give either --scenario FILE or --simulate M")
    k = int(fit.meta.get("k", cfg.ks[0]))
    emit_csv(return_level_frame(fit, stations, scenario, k, cfg.p), cfg.out / "scenario_return_levels.csv", RL_COLUMNS, cfg)
    return EXIT_OK


def cmd_synth(cfg: RunConfig, args) -> int:
    mid = 1 if cfg.model == "auto" else _model_id(cfg)
    stations, soi, series = synthetic_dataset(
        args.n_stations, args.first_year, args.last_year, ladder_model(mid), seed=cfg.seed, r=args.order
    )
    out = cfg.out
    (out / "daily").mkdir(parents=True, exist_ok=True)
    for s in series:
        write_daily_csv(s, out / "daily" / f"{s.station_id}.csv")
    write_station_meta(stations, out / "stations.csv")
    write_soi_csv(soi, out / "soi.csv")
    table = build_block_maxima_table(
        series, {s.station_id: s for s in stations}, yearly_soi_table(soi), cfg.ks, {s.station_id: quality_filter(s) for s in series}
    )
    emit_csv(table, out / "block_maxima.csv", BLOCK_MAXIMA_COLUMNS, cfg)
    print(f"wrote {len(series)} stations to {out}")
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig, args) -> int:
    try:
        run_pipeline(cfg)
    except BaseException as exc:
        write_manifest(cfg, False, f"{type(exc).__name__}: {exc}")
        raise
    write_manifest(cfg, True)
    print(f"pipeline complete: {len(cfg.written)} artifacts in {cfg.out}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "functional": cmd_functional,
    "ei": cmd_ei,
    "fit": cmd_fit,
    "select": cmd_select,
    "diagnose": cmd_diagnose,
    "rl": cmd_rl,
    "scenario": cmd_scenario,
    "synth": cmd_synth,
    "pipeline": cmd_pipeline,
}


# --------------------------------------------------------------------------- parsing


def _int_list(text: str) -> tuple:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _float_list(text: str) -> tuple:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; keys are long flag names (``-`` or ``_``)."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataValidationError(f"{path}: line {lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file; flags override it")
    common.add_argument("--daily-dir", type=Path)
    common.add_argument("--stations", type=Path)
    common.add_argument("--soi", type=Path)
    common.add_argument("--k", type=_int_list, default=(1, 2, 3), help="window lengths, e.g. 1,2,3")
    common.add_argument("--quantile", type=float, default=0.95)
    common.add_argument("--model", default="auto", help="ladder model id 0-4 or 'auto'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--shape-tie", action="store_true", help="fix k>1 shapes at the first k's estimate")
    common.add_argument("--horizon", type=int)
    common.add_argument("--p", type=_float_list, default=(0.01,), help="exceedance probabilities, e.g. 0.1,0.01")
    common.add_argument("--simulate", type=int, help="simulate this many SOI years")
    common.add_argument("--full-precision", action="store_true")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--block-lengths", type=_int_list, default=(365, 730))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="multiday-extremes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="validate inputs and summarise")
    sub.add_parser("functional", parents=[common], help="windowed-minimum block maxima")
    p = sub.add_parser("ei", parents=[common], help="extremal index per station")
    p.add_argument("--form", choices=("standard", "verbatim"), default="standard")
    p = sub.add_parser("fit", parents=[common], help="fit one ladder model")
    p.add_argument("--block-maxima", type=Path)
    p = sub.add_parser("select", parents=[common], help="fit the ladder and select by AIC")
    p.add_argument("--block-maxima", type=Path)
    p = sub.add_parser("diagnose", parents=[common], help="standardized residual diagnostics")
    p.add_argument("--block-maxima", type=Path)
    p.add_argument("--fit", type=Path)
    p = sub.add_parser("rl", parents=[common], help="aggregated return levels over historical SOI")
    p.add_argument("--fit", type=Path)
    p.add_argument("--end-year", type=int)
    p = sub.add_parser("scenario", parents=[common], help="return levels under an SOI scenario")
    p.add_argument("--fit", type=Path)
    p.add_argument("--scenario", type=Path, help="CSV with header year,soi")
    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--n-stations", type=int, default=20)
    p.add_argument("--first-year", type=int, default=1990)
    p.add_argument("--last-year", type=int, default=2019)
    p.add_argument("--order", type=int, default=2, help="moving-maximum order of the daily process")
    sub.add_parser("pipeline", parents=[common], help="run every stage and write all artifacts")
    return parser


_CONFIG_TYPES = {
    "k": _int_list,
    "p": _float_list,
    "block_lengths": _int_list,
    "quantile": float,
    "seed": int,
    "horizon": int,
    "simulate": int,
    "jobs": int,
    "n_stations": int,
    "first_year": int,
    "last_year": int,
    "order": int,
    "end_year": int,
    "shape_tie": lambda v: v.lower() in ("1", "true", "yes"),
    "full_precision": lambda v: v.lower() in ("1", "true", "yes"),
}


_PATH_KEYS = {"daily_dir", "stations", "soi", "out", "fit", "block_maxima", "scenario", "config"}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    if not args.config.exists():
        raise DataValidationError(f"config file not found: {args.config}")
    # a file value applies only where the flag was left at its default
    defaults = build_parser().parse_args([args.command])
    for key, raw in read_config_file(args.config).items():
        if key == "config" or not hasattr(args, key):
            raise DataValidationError(f"{args.config}: unknown key {key!r}")
        if getattr(args, key) != getattr(defaults, key):
            continue
        if key in _PATH_KEYS:
            value = Path(raw)
        else:
            value = _CONFIG_TYPES.get(key, str)(raw)
        setattr(args, key, value)
    return args


def config_from_args(args) -> RunConfig:
    ks = tuple(args.k)
    if not ks or any(not 1 <= k <= 7 for k in ks):
        raise DataValidationError(f"window lengths must lie in 1..7, got {ks}")
    if not 0 < args.quantile < 1:
        raise DataValidationError(f"--quantile must lie in (0, 1), got {args.quantile}")
    if args.model != "auto":
        try:
            int(args.model)
        except ValueError:
            raise DataValidationError(f"--model must be 0-4 or 'auto', got {args.model!r}") from None
    if any(not 0 < p < 1 for p in args.p):
        raise DataValidationError(f"--p values must lie in (0, 1), got {args.p}")
    return RunConfig(
        daily_dir=args.daily_dir,
        stations=args.stations,
        soi=args.soi,
        ks=ks,
        quantile=args.quantile,
        model=str(args.model),
        out=args.out,
        seed=args.seed,
        shape_tie=args.shape_tie,
        horizon=args.horizon,
        p=tuple(args.p),
        full_precision=args.full_precision,
        jobs=args.jobs,
        block_lengths=tuple(args.block_lengths),
        simulate=args.simulate,
    )


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
        )
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except DataValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ExtremesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
