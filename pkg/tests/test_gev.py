import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import genextreme

from multiday_extremes.exceptions import DataValidationError
from multiday_extremes.gev import (
    PENALTY,
    GevParams,
    LinkModel,
    covariate_matrix,
    gev_cdf,
    gev_logpdf,
    gev_pdf,
    gev_quantile,
    nll_linked,
    nll_stationary,
)

GRID = [GevParams(mu, s, xi) for mu in (0.0, 10.0) for s in (0.5, 2.0) for xi in (-0.3, 0.0, 0.16, 0.3)]


def test_gumbel_at_location():
    assert gev_cdf(0.0, GevParams(0, 1, 0)) == pytest.approx(math.exp(-1))


def test_frechet_bracket_one():
    assert gev_cdf(0.0, GevParams(0, 1, 1)) == pytest.approx(math.exp(-1))


def test_return_level_example_cdf():
    assert gev_cdf(6.797, GevParams(0, 1, 0.16)) == pytest.approx(0.99, abs=1e-4)


def test_quantile_examples():
    assert gev_quantile(math.exp(-1), GevParams(0, 1, 0)) == pytest.approx(0.0, abs=1e-12)
    z = gev_quantile(0.99, GevParams(0, 1, 0.16))
    y = -math.log(0.99)
    assert z == pytest.approx((y**-0.16 - 1) / 0.16, abs=1e-6)
    assert z == pytest.approx(6.797, abs=1e-3)


def test_quantile_rejects_bounds():
    for p in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            gev_quantile(p, GevParams(0, 1, 0))


@pytest.mark.parametrize("params", GRID)
def test_cdf_quantile_duality(params):
    p = np.linspace(0.001, 0.999, 200)
    assert np.max(np.abs(gev_cdf(gev_quantile(p, params), params) - p)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-50, 50),
    st.floats(0.05, 20),
    st.floats(-0.45, 0.6),
    st.floats(0.001, 0.999),
)
def test_quantile_round_trip_property(mu, sigma, xi, p):
    params = GevParams(mu, sigma, xi)
    z = gev_quantile(p, params)
    assert gev_cdf(z, params) == pytest.approx(p, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("xi", [1e-7, -1e-7, 1e-9, -1e-9])
def test_xi_continuity(xi):
    z = np.linspace(-2, 8, 41)
    gumbel = np.exp(-np.exp(-z))
    assert np.max(np.abs(gev_cdf(z, GevParams(0, 1, xi)) - gumbel)) < 1e-6


@pytest.mark.parametrize("params", GRID)
def test_density_integrates_to_one(params):
    # mass outside [q(1e-13), q(1 - 1e-13)] is 2e-13
    probs = np.concatenate([[1e-13], np.logspace(-10, -1, 10), np.linspace(0.2, 0.8, 4), 1 - np.logspace(-1, -10, 10), [1 - 1e-13]])
    knots = gev_quantile(probs, params)
    total = sum(
        integrate.quad(lambda z: gev_pdf(z, params), a, b, epsabs=1e-14, epsrel=1e-12)[0]
        for a, b in zip(knots[:-1], knots[1:])
    )
    assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("params", GRID)
def test_logpdf_matches_scipy(params):
    z = gev_quantile(np.linspace(0.01, 0.99, 25), params)
    ref = genextreme.logpdf(z, -params.xi, loc=params.mu, scale=params.sigma)
    np.testing.assert_allclose(gev_logpdf(z, params.mu, params.sigma, params.xi), ref, rtol=1e-9, atol=1e-12)


def test_nll_single_gumbel_point():
    assert nll_stationary([0.0], GevParams(0, 1, 0)) == pytest.approx(1.0)


def test_nll_penalty_for_negative_scale():
    assert nll_stationary([1.0, 2.0], (0.0, -1.0, 0.1)) == PENALTY


def test_nll_penalty_outside_support():
    # xi = 0.5, mu = 0, sigma = 1: support is z > -2
    assert nll_stationary([-3.0, 1.0], GevParams(0, 1, 0.5)) == PENALTY


def test_nll_three_point_hand_sum():
    mu, sigma, xi = 1.0, 2.0, 0.2
    data = [0.5, 2.0, 7.0]
    total = 0.0
    for z in data:
        t = 1 + xi * (z - mu) / sigma
        total += math.log(sigma) + (1 + 1 / xi) * math.log(t) + t ** (-1 / xi)
    assert nll_stationary(data, GevParams(mu, sigma, xi)) == pytest.approx(total, rel=1e-12)


def _table(n=30, seed=0):
    rng = np.random.default_rng(seed)
    return pd.DataFrame(
        {
            "station_id": ["S"] * n,
            "year": np.arange(n),
            "block_max_mm": rng.gumbel(50, 10, n),
            "soi": rng.normal(0, 8, n),
            "log_cdist": rng.uniform(0, 6, n),
            "lat": rng.uniform(-38, -12, n),
            "lon": rng.uniform(141, 153, n),
        }
    )


def test_linked_reduces_with_zero_covariates():
    t = _table()
    t[["soi", "log_cdist", "lat", "lon"]] = 0.0
    m = LinkModel((48, 1, 2, 3, 4), (9, 0.1, 0.2, 0.3, 0.4), 0.1, ("soi", "log_cdist", "lat", "lon"))
    assert nll_linked(t, m) == pytest.approx(nll_stationary(t["block_max_mm"], GevParams(48, 9, 0.1)), rel=1e-12)


def test_linked_intercept_only_model():
    t = _table()
    m = LinkModel.stationary(48, 9, 0.1)
    assert nll_linked(t, m) == pytest.approx(nll_stationary(t["block_max_mm"], GevParams(48, 9, 0.1)), rel=1e-12)


def test_link_model_parameters_and_at():
    m = LinkModel((1, 2, 0, 0, 0), (3, 0.5, 0, 0, 0), 0.1, ("soi",))
    p = m.at(soi=2.0, log_cdist=9, lat=9, lon=9)
    assert (p.mu, p.sigma, p.xi) == (5.0, 4.0, 0.1)
    assert m.n_params == 5
    assert m.free_names() == ["mu0", "mu1", "sigma0", "sigma1", "xi"]
    assert LinkModel.from_free_vector(("soi",), m.free_vector()) == m


def test_link_model_rejects_inactive_coefficient():
    with pytest.raises(ValueError):
        LinkModel((1, 2, 0, 0, 0), (3, 0, 0, 0, 0), 0.1, ())


def test_covariate_nan_names_row():
    t = _table(5)
    t.loc[2, "soi"] = np.nan
    with pytest.raises(DataValidationError, match="year 2"):
        covariate_matrix(t, ("soi",))


def test_gev_params_validation():
    with pytest.raises(ValueError):
        GevParams(0, 0, 0.1)
