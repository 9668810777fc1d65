"""Derivative-free Nelder-Mead simplex minimizer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    n_evals: int
    n_iter: int
    converged: bool
    message: str


def nelder_mead(
    fun: Callable[[np.ndarray], float],
    x0,
    step=0.1,
    xtol: float = 1e-8,
    max_evals: int = 50_000,
    adaptive: bool = True,
) -> SimplexResult:
    """Minimize ``fun`` starting from an axis-aligned simplex around ``x0``.

    Stops when the simplex diameter, max over vertices of the sup-norm
    distance to the best vertex, falls below ``xtol * max(1, |x_best|)``,
    or when ``max_evals`` evaluations are spent. ``adaptive`` uses the
    dimension-dependent coefficients of Gao & Han (2012).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if adaptive and n > 1:
        alpha, gamma, rho, shrink = 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2 * n), 1.0 - 1.0 / n
    else:
        alpha, gamma, rho, shrink = 1.0, 2.0, 0.5, 0.5

    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    sim = np.tile(x0, (n + 1, 1))
    sim[1:] += np.diag(step)
    fsim = np.array([fun(v) for v in sim])
    n_evals = n + 1
    n_iter = 0

    while True:
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
        scale = max(1.0, float(np.max(np.abs(sim[0]))))
        if np.max(np.abs(sim[1:] - sim[0])) <= xtol * scale:
            return SimplexResult(sim[0].copy(), float(fsim[0]), n_evals, n_iter, True, "simplex diameter below tolerance")
        if n_evals >= max_evals:
            return SimplexResult(sim[0].copy(), float(fsim[0]), n_evals, n_iter, False, "evaluation budget exhausted")
        n_iter += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = fun(xr)
        n_evals += 1
        if fr < fsim[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = fun(xe)
            n_evals += 1
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
            continue
        if fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
            continue
        if fr < fsim[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (worst - centroid)
        fc = fun(xc)
        n_evals += 1
        if fc < min(fr, fsim[-1]):
            sim[-1], fsim[-1] = xc, fc
            continue
        sim[1:] = sim[0] + shrink * (sim[1:] - sim[0])
        fsim[1:] = [fun(v) for v in sim[1:]]
        n_evals += n
