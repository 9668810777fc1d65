"""Generators with known extreme-value behaviour, used as test oracles.

All randomness comes from :class:`~multiday_extremes.rng.CounterRNG`, so
every sequence is a pure function of its seed.
"""
from __future__ import annotations

import calendar
import datetime as dt
import math

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DataValidationError
from .gev import GevParams, LinkModel, _quantile
from .ingest import DailySeries, SoiSeries, StationMeta, yearly_soi_table
from .model_select import build_ladder
from .rng import CounterRNG, as_rng


def sample_iid_gev(params: GevParams, n: int, seed=0) -> np.ndarray:
    """Inverse-CDF draws from ``params``."""
    if n == 0:
        return np.empty(0)
    return _quantile(as_rng(seed).uniform(n), params.mu, params.sigma, params.xi)


def unit_frechet(u: np.ndarray) -> np.ndarray:
    return -1.0 / np.log(u)


def _frechet_to_gev(w: np.ndarray, params: GevParams) -> np.ndarray:
    # monotone map sending unit Frechet to GEV(mu, sigma, xi)
    return params.mu + params.sigma * np.expm1(params.xi * np.log(w)) / params.xi


def sample_moving_maximum(
    r: int,
    n: int,
    seed=0,
    marginal: GevParams = GevParams(1.0, 1.0, 1.0),
    iid_weight: float = 0.0,
) -> np.ndarray:
    """Moving maximum of order ``r`` with extremal index ``(1 - b)/r + b``.

    ``X_t = h(max((1 - b) max_{j<r} W_{t+j} / r, b V_t))`` with ``W`` and
    ``V`` i.i.d. unit Frechet and ``b = iid_weight``. The weights make the
    inner maximum unit Frechet again and the monotone ``h`` gives the
    requested marginal exactly. With ``b = 0`` the extremal index is
    ``1/r``; the independent component adds isolated single-day peaks.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"order r must be an integer >= 1, got {r!r}")
    if marginal.xi <= 0:
        raise ValueError("moving-maximum marginal must be of Frechet type (xi > 0)")
    if not 0 <= iid_weight < 1:
        raise ValueError(f"iid_weight must lie in [0, 1), got {iid_weight}")
    if n == 0:
        return np.empty(0)
    rng = as_rng(seed)
    w = unit_frechet(rng.uniform(n + r - 1))
    m = (1 - iid_weight) * sliding_window_view(w, r).max(axis=1) / r
    if iid_weight > 0:
        m = np.maximum(m, iid_weight * unit_frechet(rng.uniform(n)))
    return _frechet_to_gev(m, marginal)


def sample_linked_gev(model: LinkModel, covariates: pd.DataFrame, seed=0) -> pd.DataFrame:
    """One GEV draw per covariate row; returns a copy with ``block_max_mm`` filled."""
    mu, sigma, xi = model.parameters(covariates)
    bad = np.flatnonzero(sigma <= 0)
    if bad.size:
        raise DataValidationError(f"row {bad[0]}: scale {sigma[bad[0]]:g} is not positive")
    out = covariates.copy()
    out["block_max_mm"] = _quantile(as_rng(seed).uniform(len(out)), mu, sigma, xi)
    return out


# --------------------------------------------------------------------------- datasets


def synthetic_stations(n_stations: int, seed=0) -> list[StationMeta]:
    """Stations scattered over an eastern-Australia-like box."""
    rng = as_rng(seed)
    u = rng.uniform(3 * n_stations).reshape(3, -1)
    lat = -38 + 26 * u[0]
    lon = 141 + 12 * u[1]
    cdist = np.exp(np.log(1.0) + u[2] * (np.log(500.0) - np.log(1.0)))
    return [
        StationMeta(f"S{i:03d}", round(float(lat[i]), 4), round(float(lon[i]), 4), round(float(cdist[i]), 3))
        for i in range(n_stations)
    ]


def synthetic_soi(first_year: int, last_year: int, seed=0, spread: float = 8.0) -> SoiSeries:
    """Monthly SOI: a yearly level plus monthly noise, rounded to 0.1."""
    rng = as_rng(seed)
    years = np.arange(first_year, last_year + 1)
    level = spread * rng.normal(years.size)
    noise = 0.5 * spread * rng.normal(12 * years.size).reshape(years.size, 12)
    values = np.round(level[:, None] + noise, 1)
    return SoiSeries(np.repeat(years, 12), np.tile(np.arange(1, 13), years.size), values.ravel())


def station_year_table(stations, soi_by_year: dict, years) -> pd.DataFrame:
    rows = []
    for s in stations:
        for y in years:
            rows.append((s.station_id, int(y), float(soi_by_year[y]), s.log_cdist, s.latitude, s.longitude))
    return pd.DataFrame(rows, columns=["station_id", "year", "soi", "log_cdist", "lat", "lon"])


def synthetic_daily(
    station: StationMeta,
    model: LinkModel,
    soi_by_year: dict,
    first_year: int,
    last_year: int,
    r: int = 2,
    seed=0,
    missing_rate: float = 0.002,
) -> DailySeries:
    """Daily series whose calendar-year maxima follow ``model``.

    Each year's days come from a moving maximum of order ``r`` whose
    marginal is ``G_t ** (r / (n_days + r - 1))``, so the yearly maximum
    has law ``G_t = GEV(mu_t, sigma_t, xi)`` from the link. Negative draws
    are recorded as dry days (0 mm). A fraction ``missing_rate`` of days
    is blanked out at random.
    """
    rng = as_rng(seed)
    start = dt.date(first_year, 1, 1)
    n = (dt.date(last_year, 12, 31) - start).days + 1
    w = unit_frechet(rng.uniform(n + r - 1))
    m = sliding_window_view(w, r).max(axis=1) / r
    years = (np.datetime64(start, "D") + np.arange(n)).astype("datetime64[Y]").astype(int) + 1970
    x = np.empty(n)
    for y in range(first_year, last_year + 1):
        sel = years == y
        n_days = 366 if calendar.isleap(y) else 365
        g = model.at(soi_by_year[y], station.log_cdist, station.latitude, station.longitude)
        # G ** a is GEV with the same shape, shifted location and scaled scale
        a = r / (n_days + r - 1)
        daily = GevParams(g.mu - g.sigma * (1 - a**g.xi) / g.xi, g.sigma * a**g.xi, g.xi)
        # m is unit Frechet; G_daily(x) = exp(-1/w) inverts to this map
        x[sel] = _frechet_to_gev(m[sel], daily)
    x = np.maximum(x, 0.0)
    drop = rng.uniform(n) < missing_rate
    x[drop] = np.nan
    return DailySeries(station.station_id, start, x)


def synthetic_dataset(
    n_stations: int,
    first_year: int,
    last_year: int,
    model: LinkModel,
    seed=0,
    r: int = 2,
    missing_rate: float = 0.002,
):
    """Stations, monthly SOI and daily series for an end-to-end fixture."""
    root = CounterRNG(seed)
    stations = synthetic_stations(n_stations, root.spawn(0))
    soi = synthetic_soi(first_year, last_year, root.spawn(1))
    soi_by_year = yearly_soi_table(soi)
    series = [
        synthetic_daily(s, model, soi_by_year, first_year, last_year, r, root.spawn(100 + i), missing_rate)
        for i, s in enumerate(stations)
    ]
    return stations, soi, series


def ladder_model(model_id: int, strength: float = 1.0) -> LinkModel:
    """Reference coefficients for simulation studies on the nested ladder.

    Covariates enter with effects sized to be clearly detectable in a few
    hundred station-years; ``strength`` scales all slopes.
    """
    active = build_ladder().masks[model_id]
    slopes_mu = {"soi": 1.2, "log_cdist": -4.0, "lat": 0.8, "lon": 1.0}
    slopes_sigma = {"soi": 0.35, "log_cdist": -1.5, "lat": 0.25, "lon": 0.3}
    mu = [60.0] + [strength * slopes_mu[r] if r in active else 0.0 for r in ("soi", "log_cdist", "lat", "lon")]
    sig = [20.0] + [strength * slopes_sigma[r] if r in active else 0.0 for r in ("soi", "log_cdist", "lat", "lon")]
    # centre spatial effects on the synthetic station box so intercepts keep their meaning
    centre = {"log_cdist": math.log(500.0) / 2, "lat": -25.0, "lon": 147.0}
    for j, name in enumerate(("soi", "log_cdist", "lat", "lon"), start=1):
        if name in centre:
            mu[0] -= mu[j] * centre[name]
            sig[0] -= sig[j] * centre[name]
    return LinkModel(tuple(mu), tuple(sig), 0.15, active)
