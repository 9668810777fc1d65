"""GEV distribution functions, the covariate link and negative log-likelihoods.

The distribution function is

    G(z) = exp(-[1 + xi (z - mu) / sigma] ** (-1 / xi)),

with the Gumbel limit ``exp(-exp(-(z - mu) / sigma))`` used whenever
``|xi| < XI_SWITCH``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import DataValidationError

XI_SWITCH = 1e-8
PENALTY = 1e10
REGRESSORS = ("soi", "log_cdist", "lat", "lon")
COEF_NAMES = tuple(f"mu{i}" for i in range(5)) + tuple(f"sigma{i}" for i in range(5)) + ("xi",)


@dataclass(frozen=True)
class GevParams:
    mu: float
    sigma: float
    xi: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not (np.isfinite(self.mu) and np.isfinite(self.xi)):
            raise ValueError("mu and xi must be finite")


def _unpack(params):
    if isinstance(params, GevParams):
        return params.mu, params.sigma, params.xi
    mu, sigma, xi = params
    return mu, sigma, xi


def gev_logpdf(z, mu, sigma, xi):
    """Log density, ``-inf`` outside the support. ``xi`` is a scalar."""
    z, mu, sigma = np.broadcast_arrays(np.asarray(z, float), np.asarray(mu, float), np.asarray(sigma, float))
    x = (z - mu) / sigma
    if abs(xi) < XI_SWITCH:
        return -np.log(sigma) - x - np.exp(-x)
    t = xi * x
    out = np.full(x.shape, -np.inf)
    ok = t > -1
    L = np.log1p(t[ok])
    out[ok] = -np.log(sigma[ok]) - (1 + 1 / xi) * L - np.exp(-L / xi)
    return out


def _cdf(z, mu, sigma, xi):
    z, mu, sigma = np.broadcast_arrays(np.asarray(z, float), np.asarray(mu, float), np.asarray(sigma, float))
    x = (z - mu) / sigma
    if abs(xi) < XI_SWITCH:
        return np.exp(-np.exp(-x))
    t = xi * x
    # outside the support: below the lower end point (xi > 0) or above the upper one (xi < 0)
    out = np.full(x.shape, 0.0 if xi > 0 else 1.0)
    ok = t > -1
    out[ok] = np.exp(-np.exp(-np.log1p(t[ok]) / xi))
    return out


def _quantile(p, mu, sigma, xi):
    p = np.asarray(p, float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("probabilities must lie strictly between 0 and 1")
    log_y = np.log(-np.log(p))
    if abs(xi) < XI_SWITCH:
        return mu - sigma * log_y
    return mu + sigma * np.expm1(-xi * log_y) / xi


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def gev_cdf(z, params):
    mu, sigma, xi = _unpack(params)
    if np.any(np.asarray(sigma) <= 0):
        raise ValueError("sigma must be positive")
    return _scalar(_cdf(z, mu, sigma, xi))


def gev_sf(z, params):
    """Survival function ``1 - G(z)``, computed without cancellation."""
    mu, sigma, xi = _unpack(params)
    z, mu, sigma = np.broadcast_arrays(np.asarray(z, float), np.asarray(mu, float), np.asarray(sigma, float))
    x = (z - mu) / sigma
    if abs(xi) < XI_SWITCH:
        return _scalar(-np.expm1(-np.exp(-x)))
    t = xi * x
    out = np.full(x.shape, 1.0 if xi > 0 else 0.0)
    ok = t > -1
    out[ok] = -np.expm1(-np.exp(-np.log1p(t[ok]) / xi))
    return _scalar(out)


def gev_pdf(z, params):
    mu, sigma, xi = _unpack(params)
    return _scalar(np.exp(gev_logpdf(z, mu, sigma, xi)))


def gev_quantile(p, params):
    """Level ``z`` with ``G(z) = p`` (``p`` is the non-exceedance probability)."""
    mu, sigma, xi = _unpack(params)
    if np.any(np.asarray(sigma) <= 0):
        raise ValueError("sigma must be positive")
    return _scalar(_quantile(p, mu, sigma, xi))


def _nll(z, mu, sigma, xi) -> float:
    sigma = np.asarray(sigma, float)
    if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0) or not np.isfinite(xi):
        return PENALTY
    ll = gev_logpdf(z, mu, sigma, xi)
    total = -float(np.sum(ll))
    return total if np.isfinite(total) else PENALTY


def nll_stationary(data, params) -> float:
    """Negative log-likelihood of i.i.d. GEV data.

    Returns ``PENALTY`` when ``sigma <= 0`` or any point lies outside the
    support, so optimizers see a large finite value instead of ``inf``.
    """
    data = np.asarray(data, float)
    if data.size == 0:
        raise ValueError("data must be non-empty")
    mu, sigma, xi = _unpack(params)
    return _nll(data, mu, sigma, xi)


# --------------------------------------------------------------------------- link


def _canonical_active(active) -> tuple[str, ...]:
    active = tuple(active)
    unknown = set(active) - set(REGRESSORS)
    if unknown:
        raise ValueError(f"unknown regressors {sorted(unknown)}; choose from {REGRESSORS}")
    return tuple(r for r in REGRESSORS if r in active)


@dataclass(frozen=True)
class LinkModel:
    """Identity links ``mu_t = mu0 + sum mu_i c_i`` and ``sigma_t = sigma0 + sum sigma_i c_i``.

    Coefficient ``i = 1..4`` multiplies ``REGRESSORS[i - 1]``. Coefficients
    of regressors outside ``active`` must be exactly zero. The shape
    ``xi`` has no covariates.
    """

    mu_coeffs: tuple
    sigma_coeffs: tuple
    xi: float
    active: tuple = ()

    def __post_init__(self):
        mu = tuple(float(c) for c in self.mu_coeffs)
        sig = tuple(float(c) for c in self.sigma_coeffs)
        if len(mu) != 5 or len(sig) != 5:
            raise ValueError("mu_coeffs and sigma_coeffs need 5 entries (intercept + 4 regressors)")
        active = _canonical_active(self.active)
        for i, name in enumerate(REGRESSORS, start=1):
            if name not in active and (mu[i] != 0 or sig[i] != 0):
                raise ValueError(f"coefficient on inactive regressor {name!r} must be 0")
        object.__setattr__(self, "mu_coeffs", mu)
        object.__setattr__(self, "sigma_coeffs", sig)
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "active", active)

    @classmethod
    def stationary(cls, mu: float, sigma: float, xi: float) -> "LinkModel":
        return cls((mu, 0, 0, 0, 0), (sigma, 0, 0, 0, 0), xi, ())

    @property
    def n_params(self) -> int:
        return 2 * (1 + len(self.active)) + 1

    @property
    def active_index(self) -> list[int]:
        return [REGRESSORS.index(r) + 1 for r in self.active]

    def free_names(self) -> list[str]:
        idx = [0] + self.active_index
        return [f"mu{i}" for i in idx] + [f"sigma{i}" for i in idx] + ["xi"]

    def free_vector(self) -> np.ndarray:
        idx = [0] + self.active_index
        return np.array([self.mu_coeffs[i] for i in idx] + [self.sigma_coeffs[i] for i in idx] + [self.xi])

    @classmethod
    def from_free_vector(cls, active, vec) -> "LinkModel":
        active = _canonical_active(active)
        idx = [0] + [REGRESSORS.index(r) + 1 for r in active]
        p = len(idx)
        mu, sig = [0.0] * 5, [0.0] * 5
        for j, i in enumerate(idx):
            mu[i] = float(vec[j])
            sig[i] = float(vec[p + j])
        return cls(tuple(mu), tuple(sig), float(vec[2 * p]), active)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(COEF_NAMES, self.mu_coeffs + self.sigma_coeffs + (self.xi,)))

    def with_active(self, active) -> "LinkModel":
        """Same coefficients viewed under a larger active set."""
        return LinkModel(self.mu_coeffs, self.sigma_coeffs, self.xi, active)

    def parameters(self, covariates) -> tuple[np.ndarray, np.ndarray, float]:
        """Per-row ``(mu_t, sigma_t, xi)``.

        ``covariates`` is a DataFrame with the regressor columns or an
        array with one column per entry of ``REGRESSORS``.
        """
        C = covariate_matrix(covariates, self.active)
        mu = np.full(C.shape[0], self.mu_coeffs[0])
        sigma = np.full(C.shape[0], self.sigma_coeffs[0])
        for j, i in enumerate(self.active_index):
            mu = mu + self.mu_coeffs[i] * C[:, j]
            sigma = sigma + self.sigma_coeffs[i] * C[:, j]
        return mu, sigma, self.xi

    def at(self, soi: float, log_cdist: float, lat: float, lon: float) -> GevParams:
        row = np.array([[soi, log_cdist, lat, lon]])
        mu, sigma, xi = self.parameters(row)
        return GevParams(float(mu[0]), float(sigma[0]), xi)


def covariate_matrix(covariates, active, columns=REGRESSORS) -> np.ndarray:
    """Columns of ``covariates`` for the ``active`` regressors, as floats.

    For arrays, ``columns`` names the array's columns. NaN in an active
    column raises :class:`DataValidationError` naming the station-year
    when those fields are present.
    """
    active = tuple(active)
    if isinstance(covariates, pd.DataFrame):
        n = len(covariates)
        if not active:
            return np.empty((n, 0))
        missing_cols = [c for c in active if c not in covariates.columns]
        if missing_cols:
            raise DataValidationError(f"table lacks covariate columns {missing_cols}")
        C = covariates.loc[:, list(active)].to_numpy(dtype=float)
        bad = ~np.isfinite(C)
        if bad.any():
            row = int(np.flatnonzero(bad.any(axis=1))[0])
            where = f"row {row}"
            if {"station_id", "year"} <= set(covariates.columns):
                rec = covariates.iloc[row]
                where = f"station {rec['station_id']} year {rec['year']}"
            raise DataValidationError(f"missing covariate {active[int(np.flatnonzero(bad[row])[0])]!r} at {where}")
        return C
    C = np.asarray(covariates, float)
    if C.ndim == 1:
        C = C[:, None] if len(columns) == 1 else C[None, :]
    columns = tuple(columns)
    if C.shape[1] != len(columns):
        raise ValueError(f"expected {len(columns)} covariate columns, got {C.shape[1]}")
    C = C[:, [columns.index(a) for a in active]]
    if not np.all(np.isfinite(C)):
        raise DataValidationError(f"missing covariate at row {int(np.flatnonzero(~np.isfinite(C).all(axis=1))[0])}")
    return C


def nll_linked(table: pd.DataFrame, model: LinkModel, response: str = "block_max_mm") -> float:
    """Negative log-likelihood of the block maxima in ``table`` under ``model``."""
    z = table[response].to_numpy(dtype=float)
    if z.size == 0:
        raise ValueError("table must be non-empty")
    mu, sigma, xi = model.parameters(table)
    return _nll(z, mu, sigma, xi)
