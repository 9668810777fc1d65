import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiday_extremes.exceptions import InfeasibleError
from multiday_extremes.extremal import (
    ExceedanceRecord,
    ExtremalIndex,
    exceedances,
    ferro_segers,
    theta_for_windowed,
    theta_interval_small_gaps,
    theta_verbatim,
)
from multiday_extremes.ingest import DailySeries
from multiday_extremes.synthetic import sample_iid_gev, sample_moving_maximum, unit_frechet
from multiday_extremes.gev import GevParams
from multiday_extremes.rng import CounterRNG


def record(T):
    T = np.asarray(T)
    times = np.concatenate([[0], np.cumsum(T)])
    return ExceedanceRecord(0.0, 0.95, times, T)


def test_single_exceedance_is_infeasible():
    with pytest.raises(InfeasibleError):
        exceedances([0, 0, 0, 10], 0.5)


def test_exceedance_times_and_gaps():
    rec = exceedances([1, 9, 1, 9, 1, 9], 0.5, threshold=5.0)
    # 0-based positions of days 2, 4, 6
    assert rec.times.tolist() == [1, 3, 5]
    assert rec.inter_times.tolist() == [2, 2]


def test_exceedances_toy_series_brute_force():
    x = np.array([0, 5, 0, 7, 0, 0, 6, 0, 8, 9], float)
    rec = exceedances(x, 0.8)
    u = np.quantile(x, 0.8)
    expected = [i for i in range(x.size) if x[i] > u]
    assert rec.times.tolist() == expected
    assert rec.inter_times.tolist() == np.diff(expected).tolist()


def test_exceedances_ignore_missing():
    x = np.array([np.nan, 10, 0, 10, np.nan, 10, 0, 0])
    rec = exceedances(x, 0.5)
    assert rec.times.tolist() == [1, 3, 5]


def test_bias_corrected_oracle():
    est = ferro_segers(record([1, 1, 10, 1, 1, 10]))
    assert est.theta == pytest.approx(0.75)
    assert est.cluster_size == pytest.approx(4 / 3)
    assert not est.clamped


def test_small_gap_form_clamps():
    est = ferro_segers(record([2, 1, 2]))
    # 2*25/(3*9) = 1.85 before the clamp
    assert est.raw_theta == pytest.approx(50 / 27)
    assert est.theta == 1.0 and est.clamped


def test_mixed_gaps_clamp_oracle():
    T = np.array([2, 1, 5])
    assert theta_interval_small_gaps(T) == pytest.approx(2 * 8**2 / (3 * 30))
    est = ferro_segers(record(T))
    # max gap 5 selects the bias-corrected ratio 2*25/(3*12)
    assert est.raw_theta == pytest.approx(50 / 36)
    assert est.theta == 1.0 and est.clamped


def test_verbatim_form_clamps_oracle():
    est = ferro_segers(record([2, 1, 5]), form="verbatim")
    assert est.raw_theta == pytest.approx(2 * 64 / (3 * 22))
    assert est.theta == 1.0 and est.clamped and est.estimator_form == "verbatim"


def test_verbatim_falls_back_when_all_gaps_are_one():
    est = ferro_segers(record([1, 1, 1, 1]), form="verbatim")
    assert est.fallback and est.estimator_form == "standard"
    assert est.theta == 1.0


def test_unknown_form():
    with pytest.raises(ValueError):
        ferro_segers(record([1, 2, 3]), form="nope")


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=2, max_size=50), st.sampled_from(["standard", "verbatim"]))
def test_theta_in_unit_interval(T, form):
    est = ferro_segers(record(T), form=form)
    assert 0 < est.theta <= 1
    assert est.cluster_size == 1 / est.theta


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_scale_equivariance(seed, c):
    x = sample_iid_gev(GevParams(10, 3, 0.1), 400, seed)
    x = np.maximum(x, 0)
    a = exceedances(x, 0.9)
    b = exceedances(x * c, 0.9)
    assert a.times.tolist() == b.times.tolist()
    assert ferro_segers(a).theta == ferro_segers(b).theta


def test_theta_for_windowed_k1_matches_raw():
    x = sample_moving_maximum(2, 5000, seed=3)
    s = DailySeries("M", dt.date(2000, 1, 1), x)
    assert theta_for_windowed(s, 1).theta == ferro_segers(exceedances(x)).theta


def test_moving_maximum_order_three():
    x = sample_moving_maximum(3, 50_000, seed=11)
    assert abs(ferro_segers(exceedances(x, 0.95)).theta - 1 / 3) < 0.1


def test_iid_frechet_theta_near_one():
    x = unit_frechet(CounterRNG(5).uniform(50_000))
    assert abs(ferro_segers(exceedances(x, 0.95)).theta - 1.0) < 0.05


def test_estimator_wrapper():
    x = sample_moving_maximum(2, 20_000, seed=1)
    est = ExtremalIndex(quantile_level=0.95).fit(x)
    assert abs(est.theta_ - 0.5) < 0.1
    assert est.get_params() == {"quantile_level": 0.95, "form": "standard"}


def test_verbatim_helper():
    assert theta_verbatim(np.array([2, 3])) == pytest.approx(2 * 25 / (2 * 8))
