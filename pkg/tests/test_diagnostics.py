import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiday_extremes.diagnostics import (
    DiagnosticFailure,
    StandardizedSample,
    ad_cdf,
    anderson_darling_gumbel,
    anderson_darling_statistic,
    mann_kendall,
    quantile_plot_data,
    standardize,
)
from multiday_extremes.gev import LinkModel
from multiday_extremes.synthetic import sample_iid_gev
from multiday_extremes.gev import GevParams


def table(z, soi=None):
    z = np.asarray(z, float)
    return pd.DataFrame(
        {
            "year": np.arange(z.size),
            "block_max_mm": z,
            "soi": np.zeros(z.size) if soi is None else soi,
            "log_cdist": 0.0,
            "lat": 0.0,
            "lon": 0.0,
        }
    )


def test_standardize_at_location_is_zero():
    s = standardize(table([5.0, 5.0]), LinkModel.stationary(5, 2, 0.3))
    np.testing.assert_allclose(s.values, 0.0)


def test_standardize_frechet_unit():
    s = standardize(table([math.e - 1]), LinkModel.stationary(0, 1, 1))
    assert s.values[0] == pytest.approx(1.0)


def test_standardize_gumbel_branch():
    s = standardize(table([3.0]), LinkModel.stationary(1, 2, 0.0))
    assert s.values[0] == pytest.approx(1.0)


def test_standardize_uses_covariates():
    m = LinkModel((1, 2, 0, 0, 0), (1, 0, 0, 0, 0), 0.0, ("soi",))
    s = standardize(table([3.0, 1.0], soi=[1.0, 0.0]), m)
    np.testing.assert_allclose(s.values, [0.0, 0.0])


def test_standardize_excludes_rows_outside_support():
    z = np.concatenate([np.linspace(0, 5, 199), [-100.0]])
    s = standardize(table(z), LinkModel.stationary(0, 1, 0.5))
    assert s.n_excluded == 1 and s.values.size == 199


def test_standardize_hard_failure():
    z = np.concatenate([np.linspace(0, 5, 50), [-100.0, -200.0]])
    with pytest.raises(DiagnosticFailure):
        standardize(table(z), LinkModel.stationary(0, 1, 0.5))


def test_standardized_sample_is_gumbel():
    params = GevParams(30, 8, 0.2)
    z = sample_iid_gev(params, 10_000, seed=8)
    s = np.sort(standardize(table(z), LinkModel.stationary(30, 8, 0.2)).values)
    ecdf = np.arange(1, s.size + 1) / s.size
    assert np.max(np.abs(ecdf - np.exp(-np.exp(-s)))) < 0.02


def test_quantile_plot_three_points():
    q = quantile_plot_data(np.array([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(q.theoretical, [-0.327, 0.367, 1.246], atol=1e-3)
    np.testing.assert_array_equal(q.empirical, [1, 2, 3])


def test_quantile_plot_needs_two():
    with pytest.raises(ValueError):
        quantile_plot_data(np.array([1.0]))


def test_quantile_plot_on_plotting_positions():
    n = 500
    x = -np.log(-np.log(np.arange(1, n + 1) / (n + 1)))
    q = quantile_plot_data(x[::-1])
    assert np.max(np.abs(q.theoretical - q.empirical)) < 1e-12


@settings(max_examples=40)
@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=60))
def test_quantile_plot_monotone(x):
    q = quantile_plot_data(np.array(x))
    assert np.all(np.diff(q.theoretical) > 0)
    assert np.all(np.diff(q.empirical) >= 0)


def test_ad_two_point_oracle():
    assert anderson_darling_statistic([0.25, 0.75]) == pytest.approx(0.2493, abs=1e-4)


def test_ad_asymptotic_critical_values():
    # upper 10%, 5% and 1% points of the limiting distribution
    for crit, level in ((1.933, 0.90), (2.492, 0.95), (3.857, 0.99)):
        assert ad_cdf(crit, 10_000) == pytest.approx(level, abs=1e-3)


def test_ad_clips_extreme_values():
    res = anderson_darling_gumbel(np.array([-50.0, 0.0, 0.1, 0.2, 60.0]))
    assert res.clipped == 2 and math.isfinite(res.statistic)


def test_ad_rejects_wrong_law():
    x = np.random.default_rng(0).normal(3, 1, 2000)
    assert anderson_darling_gumbel(x).p_value < 1e-3


def test_ad_pvalues_uniform_under_null():
    rng = np.random.default_rng(1)
    p = np.sort([anderson_darling_gumbel(rng.gumbel(size=200)).p_value for _ in range(400)])
    # Kolmogorov 1% critical value for 400 draws is about 0.081
    assert np.max(np.abs(p - np.arange(1, p.size + 1) / p.size)) < 0.081


def test_mk_increasing():
    assert mann_kendall(np.arange(10.0)).statistic == 1.0


def test_mk_constant():
    res = mann_kendall(np.ones(10))
    assert res.statistic == 0 and res.p_value == 1


def test_mk_four_point_oracle():
    assert mann_kendall(np.array([1.0, 3, 2, 4]), min_n=4).statistic == pytest.approx(4 / 6)


@settings(max_examples=40)
@given(st.lists(st.integers(-5, 5), min_size=8, max_size=40))
def test_mk_antisymmetric(x):
    x = np.array(x, float)
    assert mann_kendall(x[::-1]).statistic == -mann_kendall(x).statistic


def test_mk_time_ties_contribute_nothing():
    # pooled sample: two stations per year, opposite ordering within each year
    x = np.array([1, 2, 2, 1, 1, 2, 2, 1, 1, 2], float)
    t = np.repeat(np.arange(5), 2)
    res = mann_kendall(StandardizedSample(x, time_order=t))
    assert res.statistic == 0 and res.p_value == 1


def test_mk_detects_trend():
    x = np.arange(100) * 0.05 + np.random.default_rng(2).gumbel(size=100)
    assert mann_kendall(x).p_value < 0.01


def test_mk_matches_scipy_kendall_without_ties():
    from scipy.stats import kendalltau

    x = np.random.default_rng(3).normal(size=40)
    assert mann_kendall(x).statistic == pytest.approx(kendalltau(np.arange(40), x).statistic)
