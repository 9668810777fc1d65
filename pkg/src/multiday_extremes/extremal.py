"""Extremal index from inter-exceedance times (Ferro & Segers, 2003).

``1 / theta`` is the mean number of exceedances per cluster, i.e. the
expected run length of extreme days once one has occurred.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import InfeasibleError
from .functionals import windowed_min
from .ingest import DailySeries

DEFAULT_QUANTILE = 0.95
FORMS = ("standard", "verbatim")


@dataclass(frozen=True, eq=False)
class ExceedanceRecord:
    threshold: float
    quantile_level: float
    times: np.ndarray
    inter_times: np.ndarray

    @property
    def n_exceedances(self) -> int:
        return int(self.times.size)

    @property
    def N(self) -> int:
        return int(self.inter_times.size)


@dataclass(frozen=True)
class ExtremalIndexEstimate:
    theta: float
    cluster_size: float
    threshold_quantile: float
    n_exceedances: int
    estimator_form: str
    raw_theta: float
    clamped: bool
    fallback: bool = False


def _values(series) -> np.ndarray:
    if isinstance(series, DailySeries):
        return series.values
    if hasattr(series, "values") and hasattr(series, "k"):
        return series.values
    return np.asarray(series, dtype=float)


def exceedances(series, quantile_level: float = DEFAULT_QUANTILE, threshold: float | None = None) -> ExceedanceRecord:
    """Positions where the series exceeds its empirical ``quantile_level`` quantile.

    Positions are 0-based day offsets; missing days never exceed. Passing
    ``threshold`` skips the quantile computation.
    """
    if not 0 < quantile_level < 1:
        raise ValueError(f"quantile_level must lie in (0, 1), got {quantile_level}")
    x = _values(series)
    present = ~np.isnan(x)
    if not np.any(present):
        raise InfeasibleError("no observed values")
    u = float(np.quantile(x[present], quantile_level)) if threshold is None else float(threshold)
    with np.errstate(invalid="ignore"):
        times = np.flatnonzero(x > u)
    if times.size < 2:
        raise InfeasibleError(f"only {times.size} exceedance(s) above u={u:g}; need at least 2")
    return ExceedanceRecord(u, float(quantile_level), times, np.diff(times))


def theta_interval_small_gaps(T: np.ndarray) -> float:
    """Unclamped 2 (sum T)^2 / (N sum T^2); used when every gap is at most 2."""
    T = np.asarray(T, dtype=float)
    return 2.0 * T.sum() ** 2 / (T.size * np.sum(T**2))


def theta_interval_bias_corrected(T: np.ndarray) -> float:
    """Unclamped 2 (sum(T-1))^2 / (N sum (T-1)(T-2))."""
    T = np.asarray(T, dtype=float)
    return 2.0 * np.sum(T - 1) ** 2 / (T.size * np.sum((T - 1) * (T - 2)))


def theta_verbatim(T: np.ndarray) -> float:
    """Unclamped 2 (sum T)^2 / (N sum T (T-1)), the uncorrected moment ratio."""
    T = np.asarray(T, dtype=float)
    return 2.0 * T.sum() ** 2 / (T.size * np.sum(T * (T - 1)))


def ferro_segers(record: ExceedanceRecord, form: str = "standard") -> ExtremalIndexEstimate:
    """Intervals estimator of the extremal index, clamped to ``(0, 1]``.

    ``form="standard"`` switches to the bias-corrected ratio when any gap
    exceeds 2. ``form="verbatim"`` uses ``2 (sum T)^2 / (N sum T(T-1))``
    and falls back to the standard form when all gaps equal 1.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")
    T = record.inter_times
    if T.size < 2:
        raise InfeasibleError(f"need at least 2 inter-exceedance times, got {T.size}")
    fallback = False
    used = form
    if form == "verbatim" and np.all(T == 1):
        fallback, used = True, "standard"
    if used == "verbatim":
        raw = theta_verbatim(T)
    elif T.max() <= 2:
        raw = theta_interval_small_gaps(T)
    else:
        raw = theta_interval_bias_corrected(T)
    theta = min(1.0, raw)
    return ExtremalIndexEstimate(
        theta=theta,
        cluster_size=1.0 / theta,
        threshold_quantile=record.quantile_level,
        n_exceedances=record.n_exceedances,
        estimator_form=used,
        raw_theta=float(raw),
        clamped=raw > 1.0,
        fallback=fallback,
    )


def theta_for_windowed(
    series: DailySeries, k: int, quantile_level: float = DEFAULT_QUANTILE, form: str = "standard"
) -> ExtremalIndexEstimate:
    """Extremal index of the windowed-minimum process of ``series``."""
    source = series if k == 1 else windowed_min(series, k)
    return ferro_segers(exceedances(source, quantile_level), form=form)


class ExtremalIndex(BaseEstimator):
    """Estimator wrapper; ``fit`` takes a 1-D series (NaN = missing)."""

    def __init__(self, quantile_level: float = DEFAULT_QUANTILE, form: str = "standard"):
        self.quantile_level = quantile_level
        self.form = form

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 1:
            raise ValueError("ExtremalIndex expects a one-dimensional series")
        self.record_ = exceedances(X, self.quantile_level)
        self.estimate_ = ferro_segers(self.record_, self.form)
        self.theta_ = self.estimate_.theta
        self.cluster_size_ = self.estimate_.cluster_size
        return self
