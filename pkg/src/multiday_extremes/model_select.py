"""Nested-model ladder, information criteria and likelihood-ratio tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import chi2
from sklearn.base import BaseEstimator

from .exceptions import ConvergenceError
from .fitting import FitResult, GEVRegressor, fit_mle
from .gev import REGRESSORS, _canonical_active

LR_SLACK = 1e-4


@dataclass(frozen=True)
class ModelLadder:
    """Covariate sets indexed by model id; each applies to both location and scale."""

    masks: tuple

    @property
    def ids(self) -> list[int]:
        return list(range(len(self.masks)))

    def n_params(self, model_id: int) -> int:
        return 2 * (1 + len(self.masks[model_id])) + 1

    def is_nested(self, small: int, large: int) -> bool:
        return small != large and set(self.masks[small]) < set(self.masks[large])

    def nested_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in self.ids for j in self.ids if self.is_nested(i, j)]

    def chain_pairs(self) -> list[tuple[int, int]]:
        """Nested pairs with no intermediate model between them."""
        pairs = self.nested_pairs()
        return [
            (i, j) for i, j in pairs if not any(self.is_nested(i, m) and self.is_nested(m, j) for m in self.ids)
        ]


def build_ladder() -> ModelLadder:
    """Models 0-4: stationary; SOI; log(cdist); log(cdist)+lat+lon; all four."""
    return ModelLadder(
        (
            (),
            ("soi",),
            ("log_cdist",),
            ("log_cdist", "lat", "lon"),
            REGRESSORS,
        )
    )


def criteria(fit: FitResult, n_obs: int | None = None) -> tuple[float, float]:
    """``(AIC, BIC)`` with AIC = 2p + 2 NLL and BIC = p ln(n) + 2 NLL."""
    if not fit.converged:
        raise ConvergenceError(f"criteria need a converged fit ({fit.message})")
    return aic(fit.nll, fit.n_params), bic(fit.nll, fit.n_params, n_obs if n_obs is not None else fit.n_obs)


def aic(nll: float, n_params: int) -> float:
    return 2 * n_params + 2 * nll


def bic(nll: float, n_params: int, n_obs: float) -> float:
    return n_params * math.log(n_obs) + 2 * nll


def chi2_sf(x: float, df: int) -> float:
    return float(chi2.sf(x, df)) if x > 0 else 1.0


def likelihood_ratio(nested: FitResult, full: FitResult, slack: float = LR_SLACK) -> float:
    """p-value of ``D = 2 (nll_nested - nll_full)`` against chi-square(df).

    ``df`` is the difference in parameter counts. A nested fit that beats
    the full fit by more than ``slack`` signals an optimizer failure and
    raises.
    """
    small, large = set(nested.model.active), set(full.model.active)
    if not small <= large or nested.n_params >= full.n_params:
        raise ValueError(f"model {sorted(small)} is not nested in {sorted(large)}")
    d = 2 * (nested.nll - full.nll)
    if d < -2 * slack:
        raise ConvergenceError(
            f"nested NLL {nested.nll:.6f} below full NLL {full.nll:.6f}; the larger fit did not reach its optimum"
        )
    return chi2_sf(max(d, 0.0), full.n_params - nested.n_params)


@dataclass
class ModelScore:
    model_id: int
    fit: FitResult
    aic: float
    bic: float

    @property
    def nll(self) -> float:
        return self.fit.nll

    @property
    def n_params(self) -> int:
        return self.fit.n_params

    @property
    def converged(self) -> bool:
        return self.fit.converged


@dataclass
class SelectionReport:
    scores: list
    chosen: int | None
    lr_pvalues: dict = field(default_factory=dict)
    n_obs: int = 0

    def score(self, model_id: int) -> ModelScore:
        return next(s for s in self.scores if s.model_id == model_id)

    @property
    def chosen_fit(self) -> FitResult:
        return self.score(self.chosen).fit

    def delta_aic(self, model_id: int) -> float:
        best = min(s.aic for s in self.scores if s.converged)
        return self.score(model_id).aic - best

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "model": [s.model_id for s in self.scores],
                "nll": [s.nll for s in self.scores],
                "aic": [s.aic for s in self.scores],
                "bic": [s.bic for s in self.scores],
                "n_params": [s.n_params for s in self.scores],
                "converged": [s.converged for s in self.scores],
            }
        )


def fit_ladder(table: pd.DataFrame, ladder: ModelLadder | None = None, **fit_kwargs) -> dict[int, FitResult]:
    """Fit every model, warm-starting each from its best nested fit.

    The warm start means a larger model never ends above a model nested
    in it.
    """
    ladder = ladder or build_ladder()
    fits: dict[int, FitResult] = {}
    for mid in sorted(ladder.ids, key=lambda m: (len(ladder.masks[m]), m)):
        nested = [fits[i] for i in fits if ladder.is_nested(i, mid) and fits[i].converged]
        init = min(nested, key=lambda f: f.nll).model if nested else None
        fits[mid] = fit_mle(table, ladder.masks[mid], init, **fit_kwargs)
    return fits


def select(table: pd.DataFrame, ladder: ModelLadder | None = None, **fit_kwargs) -> SelectionReport:
    """Fit the ladder and choose the minimum-AIC converged model.

    Exact AIC ties go to the model with fewer parameters. Non-converged
    fits stay in the report with NaN criteria and are never chosen.
    """
    ladder = ladder or build_ladder()
    fits = fit_ladder(table, ladder, **fit_kwargs)
    n_obs = len(table)
    scores = []
    for mid in ladder.ids:
        f = fits[mid]
        a, b = criteria(f, n_obs) if f.converged else (math.nan, math.nan)
        scores.append(ModelScore(mid, f, a, b))
    ok = [s for s in scores if s.converged]
    chosen = min(ok, key=lambda s: (s.aic, s.n_params, s.model_id)).model_id if ok else None
    lr = {}
    for i, j in ladder.nested_pairs():
        if fits[i].converged and fits[j].converged:
            lr[(i, j)] = likelihood_ratio(fits[i], fits[j])
    return SelectionReport(scores, chosen, lr, n_obs)


class LadderSelector(BaseEstimator):
    """Select among nested linked-GEV models by AIC.

    ``fit`` takes a block-maxima table (DataFrame with ``block_max_mm``
    and covariate columns); ``best_estimator_`` is a fitted
    :class:`GEVRegressor` for the chosen model.
    """

    def __init__(self, n_restarts: int = 3, max_evals: int = 50_000, xtol: float = 1e-8, random_state: int = 0):
        self.n_restarts = n_restarts
        self.max_evals = max_evals
        self.xtol = xtol
        self.random_state = random_state

    def fit(self, X: pd.DataFrame, y=None):
        table = X if y is None else X.assign(block_max_mm=np.asarray(y, float))
        self.ladder_ = build_ladder()
        self.report_ = select(
            table,
            self.ladder_,
            n_restarts=self.n_restarts,
            max_evals=self.max_evals,
            xtol=self.xtol,
            seed=self.random_state,
        )
        if self.report_.chosen is None:
            raise ConvergenceError("no ladder model converged")
        self.chosen_ = self.report_.chosen
        est = GEVRegressor(
            active=_canonical_active(self.ladder_.masks[self.chosen_]),
            n_restarts=self.n_restarts,
            max_evals=self.max_evals,
            xtol=self.xtol,
            random_state=self.random_state,
        )
        est.result_ = self.report_.chosen_fit
        est.model_ = est.result_.model
        est.coef_ = est.model_.as_dict()
        est.nll_ = est.result_.nll
        est.n_features_in_ = len(est.model_.active)
        self.best_estimator_ = est
        return self

    def predict(self, X, p: float = 0.01):
        return self.best_estimator_.predict(X, p=p, n=len(X))
