"""Windowed-minimum functional and calendar-year block maxima.

A large value of ``Y_j = min(X_j, ..., X_{j+k-1})`` certifies ``k``
consecutive large days, so the yearly maximum of ``Y`` is the block
maximum for runs of ``k`` extreme days.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from .exceptions import DataValidationError
from .ingest import DailySeries, StationMeta, quality_filter

logger = logging.getLogger(__name__)

BLOCK_MAXIMA_COLUMNS = ("station_id", "year", "k", "block_max_mm", "soi", "log_cdist", "lat", "lon")
MAX_RELIABLE_K = 3


def _moving_min(values: np.ndarray, k: int) -> np.ndarray:
    if values.size < k:
        return np.empty(0)
    # NaN propagates through min, so windows touching a missing day stay NaN
    return sliding_window_view(values, k).min(axis=1)


def _longest_run(values: np.ndarray) -> int:
    present = np.concatenate(([0], (~np.isnan(values)).astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(present))
    if edges.size == 0:
        return 0
    return int(np.max(edges[1::2] - edges[::2]))


@dataclass(frozen=True, eq=False)
class WindowedSeries:
    """``Y_j`` anchored at the date of ``X_j``; NaN where undefined."""

    base: DailySeries
    k: int
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.size

    @property
    def station_id(self) -> str:
        return self.base.station_id

    @property
    def dates(self) -> np.ndarray:
        return self.base.dates[: len(self)]

    @property
    def years(self) -> np.ndarray:
        return self.base.years[: len(self)]

    @property
    def n_defined(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.values)))


def windowed_min(series: DailySeries, k: int) -> WindowedSeries:
    """Moving minimum over ``k`` consecutive days.

    Windows that contain a missing day produce no value. ``k`` larger
    than every run of observed days yields an all-undefined series and a
    warning rather than an error.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"window length must be an integer >= 1, got {k!r}")
    k = int(k)
    if k > MAX_RELIABLE_K:
        warnings.warn(
            f"k={k}: shape estimates for windows longer than {MAX_RELIABLE_K} days are typically unreliable",
            UserWarning,
            stacklevel=2,
        )
    values = _moving_min(series.values, k)
    out = WindowedSeries(series, k, values)
    if _longest_run(series.values) < k:
        warnings.warn(
            f"{series.station_id}: k={k} exceeds every run of observed days; no windowed values",
            UserWarning,
            stacklevel=2,
        )
    return out


def block_maxima(windowed: WindowedSeries, admissible_years: Iterable[int]) -> pd.DataFrame:
    """Maximum of the defined ``Y_j`` per admissible calendar year.

    A window belongs to the year of its first day. Years with no defined
    value are omitted and listed in ``df.attrs["skipped_years"]``.
    """
    years = windowed.years
    values = windowed.values
    rows, skipped = [], []
    for year in sorted(set(int(y) for y in admissible_years)):
        sel = (years == year) & ~np.isnan(values)
        if not np.any(sel):
            skipped.append(year)
            logger.info("%s k=%d: no windowed values in %d, year skipped", windowed.station_id, windowed.k, year)
            continue
        rows.append((windowed.station_id, year, windowed.k, float(values[sel].max())))
    df = pd.DataFrame(rows, columns=list(BLOCK_MAXIMA_COLUMNS[:4]))
    df.attrs["skipped_years"] = skipped
    return df


def build_block_maxima_table(
    series: Iterable[DailySeries],
    stations: Mapping[str, StationMeta],
    soi_by_year: Mapping[int, float],
    ks: Iterable[int],
    admissible: Mapping[str, set[int]] | None = None,
) -> pd.DataFrame:
    """Block maxima for every station and window length, joined with covariates.

    Station-years without a complete SOI year are dropped.
    """
    ks = list(ks)
    frames = []
    skipped = []
    for s in series:
        meta = stations[s.station_id]
        years = admissible[s.station_id] if admissible is not None else quality_filter(s)
        years = {y for y in years if y in soi_by_year}
        for k in ks:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                bm = block_maxima(windowed_min(s, k), years)
            skipped.extend((s.station_id, k, y) for y in bm.attrs["skipped_years"])
            if bm.empty:
                continue
            bm["soi"] = [soi_by_year[y] for y in bm["year"]]
            bm["log_cdist"] = meta.log_cdist
            bm["lat"] = meta.latitude
            bm["lon"] = meta.longitude
            frames.append(bm)
    if frames:
        table = pd.concat(frames, ignore_index=True)
    else:
        table = pd.DataFrame(columns=list(BLOCK_MAXIMA_COLUMNS))
    table = table.sort_values(["k", "station_id", "year"], kind="mergesort").reset_index(drop=True)
    table.attrs["skipped"] = skipped
    return table


def write_block_maxima_csv(table: pd.DataFrame, path, float_format: str | None = "%.6g") -> None:
    table.loc[:, list(BLOCK_MAXIMA_COLUMNS)].to_csv(Path(path), index=False, float_format=float_format)


def read_block_maxima_csv(path) -> pd.DataFrame:
    table = pd.read_csv(path, dtype={"station_id": str})
    missing = [c for c in BLOCK_MAXIMA_COLUMNS if c not in table.columns]
    if missing:
        raise DataValidationError(f"{path}: missing columns {missing}")
    return table


class WindowedMinimum(TransformerMixin, BaseEstimator):
    """Transformer form of :func:`windowed_min`.

    ``X`` is a 1-D series or a 2-D array with one series per column (NaN
    allowed). Output has ``n - k + 1`` rows.
    """

    def __init__(self, k: int = 1):
        self.k = k

    def fit(self, X, y=None):
        X = self._validate(X)
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        squeeze = np.ndim(X) == 1
        X = self._validate(X)
        out = np.column_stack([_moving_min(col, self.k) for col in X.T]) if X.shape[0] >= self.k else np.empty((0, X.shape[1]))
        return out.ravel() if squeeze else out

    @staticmethod
    def _validate(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return check_array(X, ensure_all_finite="allow-nan", ensure_min_samples=1)
