"""Maximum-likelihood fitting of stationary and covariate-linked GEV models."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DataValidationError
from .gev import (
    COEF_NAMES,
    PENALTY,
    REGRESSORS,
    XI_SWITCH,
    LinkModel,
    _canonical_active,
    _quantile,
    covariate_matrix,
    gev_logpdf,
)
from .optimize import nelder_mead
from .rng import CounterRNG

logger = logging.getLogger(__name__)

RECORD_VERSION = 1
MIN_ROWS_PER_PARAM = 10
HESSIAN_STEP = 1e-4


def _meta_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


@dataclass(frozen=True)
class FitResult:
    model: LinkModel
    nll: float
    std_errors: dict
    covariance: np.ndarray
    n_params: int
    n_obs: int
    converged: bool
    message: str = ""
    n_evals: int = 0
    restart_nlls: tuple = ()
    fixed_xi: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def free_names(self) -> list[str]:
        names = self.model.free_names()
        return names[:-1] if self.fixed_xi else names

    def to_record(self) -> str:
        """Versioned ``key = value`` text, one coefficient per line."""
        lines = [
            "# multiday_extremes GEV fit record",
            f"format_version = {RECORD_VERSION}",
        ]
        for key, value in sorted(self.meta.items()):
            lines.append(f"meta.{key} = {value}")
        lines += [
            f"active = {','.join(self.model.active)}",
            f"n_obs = {self.n_obs}",
            f"n_params = {self.n_params}",
            f"nll = {self.nll!r}",
            f"converged = {str(self.converged).lower()}",
            f"fixed_xi = {str(self.fixed_xi).lower()}",
            f"n_evals = {self.n_evals}",
            f"message = {self.message}",
        ]
        for name, value in self.model.as_dict().items():
            lines.append(f"coef.{name} = {value!r}")
        for name in self.free_names:
            lines.append(f"se.{name} = {self.std_errors.get(name, math.nan)!r}")
        names = self.free_names
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                if j >= i:
                    lines.append(f"cov.{a}.{b} = {float(self.covariance[i, j])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "FitResult":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        if int(kv.get("format_version", -1)) != RECORD_VERSION:
            raise DataValidationError(f"unsupported fit record version {kv.get('format_version')!r}")
        active = tuple(a for a in kv["active"].split(",") if a)
        coefs = [float(kv[f"coef.{n}"]) for n in COEF_NAMES]
        model = LinkModel(tuple(coefs[:5]), tuple(coefs[5:10]), coefs[10], active)
        fixed_xi = kv["fixed_xi"] == "true"
        names = model.free_names()[:-1] if fixed_xi else model.free_names()
        cov = np.full((len(names), len(names)), np.nan)
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                if j >= i:
                    cov[i, j] = cov[j, i] = float(kv[f"cov.{a}.{b}"])
        return cls(
            model=model,
            nll=float(kv["nll"]),
            std_errors={n: float(kv[f"se.{n}"]) for n in names},
            covariance=cov,
            n_params=int(kv["n_params"]),
            n_obs=int(kv["n_obs"]),
            converged=kv["converged"] == "true",
            message=kv.get("message", ""),
            n_evals=int(kv.get("n_evals", 0)),
            fixed_xi=fixed_xi,
            meta={k[5:]: _meta_value(v) for k, v in kv.items() if k.startswith("meta.")},
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_record(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FitResult":
        return cls.from_record(Path(path).read_text(encoding="utf-8"))

    def coefficient_row(self, k=None) -> dict:
        return {"k": k if k is not None else self.meta.get("k", ""), **self.model.as_dict()}

    def std_error_row(self, k=None) -> dict:
        row = {"k": k if k is not None else self.meta.get("k", "")}
        for name in COEF_NAMES:
            row[name] = self.std_errors.get(name, 0.0 if name not in self.free_names else math.nan)
        return row


# --------------------------------------------------------------------------- internals


class _Problem:
    """NLL in standardized coordinates.

    Response and active covariates are centred and scaled so the simplex
    works on O(1) quantities; the map back to raw coefficients is linear.
    """

    def __init__(self, y: np.ndarray, C: np.ndarray, fixed_xi: float | None):
        self.n, self.p = C.shape
        self.fixed_xi = fixed_xi
        self.y_loc = float(np.mean(y))
        self.y_scale = float(np.std(y))
        self.c_loc = C.mean(axis=0) if self.p else np.empty(0)
        sd = C.std(axis=0) if self.p else np.empty(0)
        self.c_scale = np.where(sd > 0, sd, 1.0)
        self.yt = (y - self.y_loc) / self.y_scale
        self.Ct = (C - self.c_loc) / self.c_scale
        self.dim = 2 * (self.p + 1) + (0 if fixed_xi is not None else 1)
        self._jacobian()

    def _jacobian(self):
        p = self.p
        m = 2 * (p + 1) + 1
        J = np.zeros((m, m))
        for block in (0, p + 1):
            J[block, block] = self.y_scale
            for i in range(p):
                J[block, block + 1 + i] = -self.y_scale * self.c_loc[i] / self.c_scale[i]
                J[block + 1 + i, block + 1 + i] = self.y_scale / self.c_scale[i]
        J[-1, -1] = 1.0
        offset = np.zeros(m)
        offset[0] = self.y_loc
        if self.fixed_xi is not None:
            offset[-1] = self.fixed_xi
            J = J[:, :-1]
        self.J, self.offset = J, offset

    def to_raw(self, theta: np.ndarray) -> np.ndarray:
        return self.offset + self.J @ theta

    def from_raw(self, raw: np.ndarray) -> np.ndarray:
        J = self.J if self.fixed_xi is None else self.J[:-1]
        off = self.offset if self.fixed_xi is None else self.offset[:-1]
        raw = raw if self.fixed_xi is None else raw[:-1]
        return np.linalg.solve(J, raw - off)

    def __call__(self, theta: np.ndarray) -> float:
        p = self.p
        a0, b0 = theta[0], theta[p + 1]
        if p:
            mu = a0 + self.Ct @ theta[1 : p + 1]
            sig = b0 + self.Ct @ theta[p + 2 : 2 * p + 2]
            if sig.min() <= 0:
                return PENALTY
            log_sig = np.log(sig).sum()
        else:
            mu, sig = a0, b0
            if sig <= 0:
                return PENALTY
            log_sig = self.n * math.log(sig)
        xi = self.fixed_xi if self.fixed_xi is not None else theta[-1]
        x = (self.yt - mu) / sig
        if abs(xi) < XI_SWITCH:
            val = log_sig + x.sum() + np.exp(-x).sum()
        else:
            t = xi * x
            if t.min() <= -1:
                return PENALTY
            L = np.log1p(t)
            val = log_sig + (1 + 1 / xi) * L.sum() + np.exp(-L / xi).sum()
        return float(val) if math.isfinite(val) else PENALTY

    def raw_nll(self, internal_nll: float) -> float:
        return internal_nll + self.n * math.log(self.y_scale)

    def default_start(self) -> np.ndarray:
        # moment start on the standardized response: mean 0, sd 1
        theta = np.zeros(self.dim)
        theta[0] = -0.45
        theta[self.p + 1] = 0.78
        if self.fixed_xi is None:
            theta[-1] = 0.1
        return theta

    def step(self) -> np.ndarray:
        s = np.full(self.dim, 0.1)
        if self.fixed_xi is None:
            s[-1] = 0.05
        return s


def _hessian(f, x: np.ndarray, rel_step: float = HESSIAN_STEP):
    n = x.size
    h = rel_step * (1 + np.abs(x))
    f0 = f(x)
    H = np.empty((n, n))
    E = np.diag(h)
    for i in range(n):
        fp, fm = f(x + E[i]), f(x - E[i])
        if max(fp, fm) >= PENALTY:
            return None
        H[i, i] = (fp - 2 * f0 + fm) / h[i] ** 2
        for j in range(i):
            vals = [f(x + E[i] + E[j]), f(x + E[i] - E[j]), f(x - E[i] + E[j]), f(x - E[i] - E[j])]
            if max(vals) >= PENALTY:
                return None
            H[i, j] = H[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h[i] * h[j])
    return H


def _nan_result(active, n_obs, message, fixed_xi) -> FitResult:
    active = _canonical_active(active)
    model = LinkModel.stationary(math.nan, math.nan, math.nan if fixed_xi is None else fixed_xi)
    if active:
        mu = [math.nan] + [math.nan if r in active else 0.0 for r in REGRESSORS]
        model = LinkModel(tuple(mu), tuple(mu), model.xi, active)
    dim = model.n_params - (fixed_xi is not None)
    names = model.free_names()[: dim]
    return FitResult(
        model=model,
        nll=math.nan,
        std_errors={n: math.nan for n in names},
        covariance=np.full((dim, dim), np.nan),
        n_params=dim,
        n_obs=n_obs,
        converged=False,
        message=message,
        fixed_xi=fixed_xi is not None,
    )


def fit_arrays(
    y,
    C,
    active=(),
    init: LinkModel | None = None,
    *,
    fixed_xi: float | None = None,
    n_restarts: int = 3,
    max_evals: int = 50_000,
    xtol: float = 1e-8,
    seed: int = 0,
    min_rows_per_param: int = MIN_ROWS_PER_PARAM,
    compute_se: bool = True,
) -> FitResult:
    """Fit ``y`` given the active-covariate matrix ``C`` (columns in ``active`` order)."""
    active = _canonical_active(active)
    y = np.asarray(y, float)
    C = np.asarray(C, float).reshape(len(y), len(active))
    n_params = 2 * (len(active) + 1) + (fixed_xi is None)
    if len(y) < min_rows_per_param * n_params:
        raise DataValidationError(
            f"{len(y)} rows cannot support {n_params} parameters (need at least {min_rows_per_param * n_params})"
        )
    if not np.all(np.isfinite(y)):
        raise DataValidationError("response contains non-finite values")
    if np.ptp(y) == 0:
        return _nan_result(active, len(y), "degenerate data: all block maxima identical", fixed_xi)

    prob = _Problem(y, C, fixed_xi)
    start = prob.default_start()
    if init is not None:
        raw = init.with_active(active).free_vector()
        if fixed_xi is not None:
            raw[-1] = fixed_xi
        candidate = prob.from_raw(raw)
        if prob(candidate) < prob(start):
            start = candidate
    if prob(start) >= PENALTY:
        return _nan_result(active, len(y), "no feasible starting point", fixed_xi)

    rng = CounterRNG(seed)
    base_step = prob.step()
    best = nelder_mead(prob, start, base_step, xtol=xtol, max_evals=max_evals)
    trace = [best.fun]
    n_evals = best.n_evals
    for r in range(n_restarts):
        # restart from the incumbent with a freshly sized, randomly signed simplex
        u = rng.uniform(2 * prob.dim)
        step = base_step * (0.5 + u[: prob.dim]) * np.where(u[prob.dim :] < 0.5, -1.0, 1.0)
        res = nelder_mead(prob, best.x, step, xtol=xtol, max_evals=max_evals)
        n_evals += res.n_evals
        trace.append(res.fun)
        if res.fun <= best.fun:
            best = res

    converged = best.converged and best.fun < PENALTY
    message = best.message
    theta = best.x
    raw = prob.to_raw(theta)
    model = LinkModel.from_free_vector(active, raw)
    dim = prob.dim
    names = model.free_names()[:dim]
    cov = np.full((dim, dim), np.nan)
    if compute_se and converged:
        H = _hessian(prob, theta)
        if H is None:
            message += "; Hessian step left the support, standard errors unavailable"
        else:
            try:
                eig = np.linalg.eigvalsh(H)
                if eig.min() <= 0:
                    raise np.linalg.LinAlgError("Hessian not positive definite")
                cov_int = np.linalg.inv(H)
                cov = prob.J @ cov_int @ prob.J.T
                cov = cov[:dim, :dim]
                cov = 0.5 * (cov + cov.T)
            except np.linalg.LinAlgError as exc:
                message += f"; {exc}, standard errors unavailable"
    se = {n: float(math.sqrt(cov[i, i])) if cov[i, i] >= 0 else math.nan for i, n in enumerate(names)}
    return FitResult(
        model=model,
        nll=prob.raw_nll(best.fun) if best.fun < PENALTY else math.nan,
        std_errors=se,
        covariance=cov,
        n_params=dim,
        n_obs=len(y),
        converged=converged,
        message=message,
        n_evals=n_evals,
        restart_nlls=tuple(prob.raw_nll(v) if v < PENALTY else math.nan for v in trace),
        fixed_xi=fixed_xi is not None,
    )


def fit_mle(
    table,
    active=(),
    init: LinkModel | None = None,
    *,
    response: str = "block_max_mm",
    **kwargs,
) -> FitResult:
    """Maximum-likelihood fit of a linked GEV to a block-maxima table.

    ``table`` is a DataFrame with a ``response`` column and the active
    covariate columns, or a plain 1-D array for a stationary fit. Other
    keyword arguments are passed to :func:`fit_arrays` (``fixed_xi``,
    ``n_restarts``, ``max_evals``, ``xtol``, ``seed``).
    """
    active = _canonical_active(active)
    if isinstance(table, pd.DataFrame):
        y = table[response].to_numpy(dtype=float)
        C = covariate_matrix(table, active)
    else:
        if active:
            raise ValueError("covariate fits need a DataFrame with covariate columns")
        y = np.asarray(table, float).ravel()
        C = np.empty((y.size, 0))
    return fit_arrays(y, C, active, init, **kwargs)


class GEVRegressor(BaseEstimator):
    """Covariate-linked GEV with identity links on location and scale.

    ``X`` is a DataFrame holding the ``active`` covariate columns, an
    array with one column per active covariate (in ``REGRESSORS`` order),
    or ``None`` for a stationary model.
    """

    def __init__(
        self,
        active=(),
        fixed_xi=None,
        n_restarts: int = 3,
        max_evals: int = 50_000,
        xtol: float = 1e-8,
        random_state: int = 0,
    ):
        self.active = active
        self.fixed_xi = fixed_xi
        self.n_restarts = n_restarts
        self.max_evals = max_evals
        self.xtol = xtol
        self.random_state = random_state

    def _matrix(self, X, n=None):
        active = _canonical_active(self.active)
        if X is None:
            if active:
                raise ValueError("covariates required for a nonstationary model")
            return np.empty((n, 0))
        if isinstance(X, pd.DataFrame):
            return covariate_matrix(X, active)
        X = np.asarray(X, float)
        if X.ndim == 1:
            X = X[:, None]
        return covariate_matrix(X, active, columns=active)

    def fit(self, X, y, init: LinkModel | None = None):
        y = np.asarray(y, float).ravel()
        C = self._matrix(X, len(y))
        self.result_ = fit_arrays(
            y,
            C,
            self.active,
            init,
            fixed_xi=self.fixed_xi,
            n_restarts=self.n_restarts,
            max_evals=self.max_evals,
            xtol=self.xtol,
            seed=self.random_state,
        )
        self.model_ = self.result_.model
        self.coef_ = self.model_.as_dict()
        self.nll_ = self.result_.nll
        self.n_features_in_ = C.shape[1]
        return self

    def gev_parameters(self, X, n=1):
        check_is_fitted(self, "result_")
        C = self._matrix(X, n)
        m = self.model_
        mu = np.full(C.shape[0], m.mu_coeffs[0])
        sigma = np.full(C.shape[0], m.sigma_coeffs[0])
        for j, i in enumerate(m.active_index):
            mu = mu + m.mu_coeffs[i] * C[:, j]
            sigma = sigma + m.sigma_coeffs[i] * C[:, j]
        return mu, sigma, m.xi

    def predict(self, X, p: float = 0.01, n=1):
        """Return level exceeded with probability ``p`` per block, per row."""
        mu, sigma, xi = self.gev_parameters(X, n)
        return _quantile(1 - p, mu, sigma, xi)

    def score(self, X, y):
        """Mean log-likelihood per observation."""
        y = np.asarray(y, float).ravel()
        mu, sigma, xi = self.gev_parameters(X, len(y))
        return float(np.mean(gev_logpdf(y, mu, sigma, xi)))
