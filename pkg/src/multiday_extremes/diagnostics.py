"""Goodness-of-fit diagnostics on Gumbel-standardized block maxima."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from .exceptions import ExtremesError
from .fitting import FitResult
from .gev import XI_SWITCH, LinkModel

MAX_EXCLUDED_FRACTION = 0.01
U_CLIP = 1e-12


class DiagnosticFailure(ExtremesError):
    """Too many rows fall outside the fitted support to standardize."""


@dataclass(frozen=True, eq=False)
class StandardizedSample:
    values: np.ndarray
    model_id: int | None = None
    n_excluded: int = 0
    time_order: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class QuantilePlotData:
    theoretical: np.ndarray
    empirical: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"theoretical": self.theoretical, "empirical": self.empirical})


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    n: int
    clipped: int = 0


def standardize(table: pd.DataFrame, fit: FitResult | LinkModel, model_id=None, response="block_max_mm") -> StandardizedSample:
    """Transform block maxima to standard Gumbel under the fitted model.

    ``(1/xi) log(1 + xi (z - mu_t) / sigma_t)``, or ``(z - mu_t) / sigma_t``
    near ``xi = 0``. Rows outside the support are dropped and counted;
    more than 1% dropped raises :class:`DiagnosticFailure`.
    """
    model = fit.model if isinstance(fit, FitResult) else fit
    if isinstance(fit, FitResult) and not fit.converged:
        raise DiagnosticFailure(f"fit did not converge: {fit.message}")
    z = table[response].to_numpy(dtype=float)
    mu, sigma, xi = model.parameters(table)
    x = (z - mu) / sigma
    if abs(xi) < XI_SWITCH:
        ok = np.isfinite(x) & (sigma > 0)
        values = x[ok]
    else:
        t = xi * x
        ok = (t > -1) & (sigma > 0)
        values = np.log1p(t[ok]) / xi
    n_bad = int(np.count_nonzero(~ok))
    if n_bad > MAX_EXCLUDED_FRACTION * len(z):
        raise DiagnosticFailure(f"{n_bad} of {len(z)} rows outside the fitted support")
    order = table["year"].to_numpy()[ok] if "year" in table.columns else None
    return StandardizedSample(values, model_id, n_bad, order)


def quantile_plot_data(sample) -> QuantilePlotData:
    """Standard-Gumbel plotting positions ``-log(-log(i/(n+1)))`` against order statistics."""
    x = np.sort(np.asarray(getattr(sample, "values", sample), float))
    n = x.size
    if n < 2:
        raise ValueError("quantile plot needs at least 2 values")
    p = np.arange(1, n + 1) / (n + 1)
    return QuantilePlotData(-np.log(-np.log(p)), x)


def anderson_darling_statistic(u) -> float:
    """``A^2`` for probability-integral-transformed values ``u``."""
    u = np.sort(np.asarray(u, float))
    n = u.size
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))) / n)


def _ad_inf(z: float) -> float:
    # asymptotic null CDF of A^2, Marsaglia & Marsaglia (2004)
    if z <= 0:
        return 0.0
    if z < 2:
        return (
            math.exp(-1.2337141 / z)
            / math.sqrt(z)
            * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z)
        )
    return math.exp(-math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z))


def _ad_errfix(n: int, x: float) -> float:
    if x > 0.8:
        return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n
    c = 0.01265 + 0.1757 / n
    if x < c:
        t = x / c
        t = math.sqrt(t) * (1 - t) * (49 * t - 102)
        return t * (0.0037 / n**2 + 0.00078 / n + 0.00006) / n
    t = (x - c) / (0.8 - c)
    t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t
    return t * (0.04213 / n + 0.01365 / n**2)


def ad_cdf(a2: float, n: int) -> float:
    """Null CDF of ``A^2`` for a fully specified continuous distribution."""
    x = _ad_inf(a2)
    return min(1.0, max(0.0, x + _ad_errfix(n, x)))


def anderson_darling_gumbel(sample, min_n: int = 5) -> TestResult:
    """A-D test of the sample against the fixed standard Gumbel law."""
    x = np.asarray(getattr(sample, "values", sample), float)
    n = x.size
    if n < min_n:
        raise ValueError(f"Anderson-Darling needs at least {min_n} values, got {n}")
    u = np.exp(-np.exp(-x))
    clipped = int(np.count_nonzero((u < U_CLIP) | (u > 1 - U_CLIP)))
    u = np.clip(u, U_CLIP, 1 - U_CLIP)
    a2 = anderson_darling_statistic(u)
    return TestResult("anderson-darling", a2, 1.0 - ad_cdf(a2, n), n, clipped)


def _tie_sums(a: np.ndarray):
    _, counts = np.unique(a, return_counts=True)
    t = counts[counts > 1].astype(float)
    return (
        np.sum(t * (t - 1) * (2 * t + 5)),
        np.sum(t * (t - 1) * (t - 2)),
        np.sum(t * (t - 1)),
    )


def mann_kendall(sample, time_order=None, min_n: int = 8) -> TestResult:
    """Mann-Kendall trend test; the statistic reported is Kendall's tau.

    ``S = sum_{i<j} sign(t_j - t_i) sign(x_j - x_i)`` so pairs tied in
    time contribute nothing; the variance carries the tie corrections for
    both time and value. The two-sided p-value uses the normal
    approximation with continuity correction.
    """
    x = np.asarray(getattr(sample, "values", sample), float)
    if time_order is None:
        time_order = getattr(sample, "time_order", None)
    t = np.arange(x.size, dtype=float) if time_order is None else np.asarray(time_order, float)
    if t.shape != x.shape:
        raise ValueError("time_order must match the sample length")
    n = x.size
    if n < min_n:
        raise ValueError(f"Mann-Kendall needs at least {min_n} values, got {n}")
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(t[i + 1 :] - t[i]) * np.sign(x[i + 1 :] - x[i])))
    n_pairs = n * (n - 1) / 2
    tau = s / n_pairs
    vx1, vx2, vx3 = _tie_sums(x)
    vt1, vt2, vt3 = _tie_sums(t)
    var = (n * (n - 1) * (2 * n + 5) - vx1 - vt1) / 18
    var += vx2 * vt2 / (9 * n * (n - 1) * (n - 2))
    var += vx3 * vt3 / (2 * n * (n - 1))
    if s == 0 or var <= 0:
        return TestResult("mann-kendall", float(tau), 1.0, n)
    z = (s - math.copysign(1, s)) / math.sqrt(var)
    return TestResult("mann-kendall", float(tau), float(min(1.0, 2 * norm.sf(abs(z)))), n)


def diagnose(table: pd.DataFrame, fit: FitResult, model_id=None) -> dict:
    """Standardize, build quantile-plot data and run both tests."""
    sample = standardize(table, fit, model_id)
    ad = anderson_darling_gumbel(sample)
    mk = mann_kendall(sample)
    return {
        "sample": sample,
        "qq": quantile_plot_data(sample),
        "anderson_darling": ad,
        "mann_kendall": mk,
    }

