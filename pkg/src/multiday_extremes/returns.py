"""Return levels, aggregated nonstationary quantiles, ENSO scenarios and
the shape-drift diagnostic for windowed block maxima."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.stats import norm

from .exceptions import DataValidationError, InfeasibleError
from .fitting import FitResult, fit_mle
from .functionals import _moving_min
from .gev import REGRESSORS, GevParams, LinkModel, _quantile, gev_sf
from .ingest import CovariateRow, DailySeries, StationMeta
from .rng import as_rng


def return_level(p: float, params: GevParams) -> float:
    """Level exceeded with probability ``p`` per block (return period ``1/p``).

    ``mu - (sigma/xi) (1 - y_p**-xi)`` with ``y_p = -log(1 - p)``, and
    ``mu - sigma log(y_p)`` in the Gumbel case.
    """
    if not 0 < p < 1:
        raise ValueError(f"exceedance probability must lie in (0, 1), got {p}")
    if not params.sigma > 0:
        raise ValueError("sigma must be positive")
    return float(_quantile(1.0 - p, params.mu, params.sigma, params.xi))


@dataclass(frozen=True, eq=False)
class ReturnSpec:
    p: float
    scenario: pd.DataFrame

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if len(self.scenario) < 1:
            raise ValueError("scenario needs at least one year")
        if "soi" not in self.scenario.columns:
            raise DataValidationError("scenario needs an 'soi' column")

    @property
    def horizon(self) -> int:
        return len(self.scenario)


@dataclass(frozen=True, eq=False)
class SoiScenario:
    values: np.ndarray
    seed: int | None

    @property
    def years(self) -> int:
        return self.values.size

    def to_frame(self, start_year: int = 1) -> pd.DataFrame:
        return pd.DataFrame({"year": np.arange(start_year, start_year + self.years), "soi": self.values})


def _model(fit) -> LinkModel:
    return fit.model if isinstance(fit, FitResult) else fit


def _station_rows(scenario: pd.DataFrame, station: StationMeta) -> pd.DataFrame:
    # spatial covariates stay fixed; only SOI varies across scenario years
    return pd.DataFrame(
        {
            "year": scenario["year"].to_numpy() if "year" in scenario.columns else np.arange(len(scenario)),
            "soi": scenario["soi"].to_numpy(dtype=float),
            "log_cdist": station.log_cdist,
            "lat": station.latitude,
            "lon": station.longitude,
        }
    )


def yearly_return_levels(spec: ReturnSpec, fit, station: StationMeta) -> np.ndarray:
    model = _model(fit)
    if isinstance(fit, FitResult) and not fit.converged:
        raise InfeasibleError("fit did not converge")
    rows = _station_rows(spec.scenario, station)
    mu, sigma, xi = model.parameters(rows)
    bad = np.flatnonzero(sigma <= 0)
    if bad.size:
        raise InfeasibleError(f"scale not positive in scenario year {rows['year'].iloc[bad[0]]}")
    return _quantile(1.0 - spec.p, mu, sigma, xi)


def aggregated_quantile(spec: ReturnSpec, fit, station: StationMeta) -> float:
    """Equal-weight mean of the per-year return levels over the scenario horizon."""
    return float(np.mean(yearly_return_levels(spec, fit, station)))


def exceedance_probability(z: float, covariates: CovariateRow, fit) -> float:
    """``1 - G(z)`` under the link-evaluated parameters for one station-year."""
    model = _model(fit)
    mu, sigma, xi = model.parameters(np.array([[covariates.soi, covariates.log_cdist, covariates.lat, covariates.lon]]))
    if sigma[0] <= 0:
        raise InfeasibleError(f"{covariates.station_id}/{covariates.year}: scale not positive")
    return float(gev_sf(z, (mu[0], sigma[0], xi)))


def percent_increase(p_la_nina: float, p_el_nino: float) -> float:
    """Difference in exceedance probability, in percentage points."""
    for p in (p_la_nina, p_el_nino):
        if not 0 < p < 1:
            raise ValueError(f"probabilities must lie in (0, 1), got {p}")
    return 100.0 * (p_la_nina - p_el_nino)


def relative_change(p_la_nina: float, p_el_nino: float) -> float:
    """Relative change ``100 (p_la - p_el) / p_el`` in percent."""
    return 100.0 * (p_la_nina - p_el_nino) / p_el_nino


def simulate_soi(history: Sequence[float], horizon: int, seed=0) -> SoiScenario:
    """Draw ``horizon`` yearly SOI values uniformly with replacement from ``history``."""
    history = np.asarray(history, float)
    if history.size == 0:
        raise ValueError("SOI history is empty")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = as_rng(seed)
    idx = rng.integers(history.size, int(horizon))
    return SoiScenario(history[idx], seed if isinstance(seed, int) else None)


def return_level_interval(p: float, fit: FitResult, covariates, alpha: float = 0.05) -> tuple[float, float, float]:
    """Delta-method interval ``(estimate, lower, upper)`` for one covariate row.

    ``covariates`` is ``(soi, log_cdist, lat, lon)``. Uses the fit's
    coefficient covariance and a central-difference gradient.
    """
    model = fit.model
    names = fit.free_names
    vec = model.free_vector()[: len(names)]
    row = np.asarray(covariates, float).reshape(1, len(REGRESSORS))

    def level(v):
        full = np.append(v, model.xi) if fit.fixed_xi else v
        m = LinkModel.from_free_vector(model.active, full)
        mu, sigma, xi = m.parameters(row)
        return float(_quantile(1 - p, mu[0], sigma[0], xi))

    est = level(vec)
    grad = np.empty(vec.size)
    for i in range(vec.size):
        h = 1e-6 * (1 + abs(vec[i]))
        e = np.zeros(vec.size)
        e[i] = h
        grad[i] = (level(vec + e) - level(vec - e)) / (2 * h)
    var = float(grad @ fit.covariance @ grad)
    half = norm.ppf(1 - alpha / 2) * math.sqrt(var) if var >= 0 else math.nan
    return est, est - half, est + half


# --------------------------------------------------------------------------- shape drift


def _fixed_block_maxima(values: np.ndarray, k: int, block_length: int) -> np.ndarray:
    y = _moving_min(values, k)
    n_blocks = values.size // block_length
    if n_blocks == 0 or y.size == 0:
        return np.empty(0)
    out = []
    for b in range(n_blocks):
        chunk = y[b * block_length : (b + 1) * block_length]
        chunk = chunk[~np.isnan(chunk)]
        if chunk.size:
            out.append(chunk.max())
    return np.asarray(out)


def shape_drift_report(
    series_set,
    k_max: int,
    block_lengths: Sequence[int] = (365,),
    *,
    threshold: float = 1.0,
    min_blocks: int = 30,
    seed: int = 0,
    n_restarts: int = 3,
) -> pd.DataFrame:
    """Stationary GEV shape of windowed-minimum block maxima by window and block length.

    Blocks are consecutive ``block_length``-day chunks of each series
    (windows anchored in a block belong to it), pooled over the set.
    ``rel_error = |xi_k - xi_1| / |xi_1|`` within each block length;
    cells above ``threshold`` are flagged and cells with fewer than
    ``min_blocks`` blocks are marked unavailable.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    arrays = [s.values if isinstance(s, DailySeries) else np.asarray(s, float) for s in series_set]
    rows = []
    for L in block_lengths:
        xi1 = math.nan
        for k in range(1, k_max + 1):
            bm = np.concatenate([_fixed_block_maxima(a, k, int(L)) for a in arrays]) if arrays else np.empty(0)
            row = {"k": k, "block_length": int(L), "n_blocks": int(bm.size), "xi": math.nan, "xi_se": math.nan}
            available = bm.size >= max(min_blocks, 1) and np.ptp(bm) > 0
            if available:
                try:
                    fit = fit_mle(bm, (), seed=seed, n_restarts=n_restarts)
                    available = fit.converged
                except DataValidationError:
                    available = False
            if available:
                row["xi"] = fit.model.xi
                row["xi_se"] = fit.std_errors.get("xi", math.nan)
            if k == 1:
                xi1 = row["xi"]
            rel = abs(row["xi"] - xi1) / abs(xi1) if available and math.isfinite(xi1) and xi1 != 0 else math.nan
            row["rel_error"] = 0.0 if k == 1 and available else rel
            row["available"] = bool(available)
            row["flagged"] = bool(available and math.isfinite(row["rel_error"]) and row["rel_error"] > threshold)
            rows.append(row)
    return pd.DataFrame(rows, columns=["k", "block_length", "n_blocks", "xi", "xi_se", "rel_error", "available", "flagged"])
