import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize
from scipy.stats import genextreme

from multiday_extremes.exceptions import DataValidationError
from multiday_extremes.fitting import FitResult, GEVRegressor, fit_mle
from multiday_extremes.gev import GevParams, LinkModel, nll_linked
from multiday_extremes.synthetic import ladder_model, sample_iid_gev, sample_linked_gev, station_year_table, synthetic_soi, synthetic_stations
from multiday_extremes.ingest import yearly_soi_table


@pytest.fixture(scope="module")
def gumbel_fit():
    return fit_mle(sample_iid_gev(GevParams(0, 1, 0), 10_000, seed=1))


def test_gumbel_recovery(gumbel_fit):
    m = gumbel_fit.model
    assert gumbel_fit.converged
    assert abs(m.mu_coeffs[0]) < 0.05
    assert abs(m.sigma_coeffs[0] - 1) < 0.05
    assert abs(m.xi) < 0.05


def test_gev_recovery_within_three_se():
    fit = fit_mle(sample_iid_gev(GevParams(10, 2, 0.2), 10_000, seed=2))
    se = fit.std_errors
    assert abs(fit.model.mu_coeffs[0] - 10) < 3 * se["mu0"]
    assert abs(fit.model.sigma_coeffs[0] - 2) < 3 * se["sigma0"]
    assert abs(fit.model.xi - 0.2) < 3 * se["xi"]


def test_matches_scipy_mle():
    x = sample_iid_gev(GevParams(5, 1.5, 0.1), 3000, seed=4)
    fit = fit_mle(x)
    c, loc, scale = genextreme.fit(x, 0.0, loc=5, scale=1.5)
    ref = -np.sum(genextreme.logpdf(x, c, loc, scale))
    # our optimum is at least as good as scipy's
    assert fit.nll <= ref + 1e-6
    assert fit.model.xi == pytest.approx(-c, abs=2e-3)


def test_degenerate_data_no_crash():
    fit = fit_mle(np.full(200, 3.0))
    assert not fit.converged
    assert np.isnan(fit.nll) or fit.nll >= 0


def test_too_few_rows():
    with pytest.raises(DataValidationError):
        fit_mle(np.arange(20.0))


def test_fixed_xi():
    x = sample_iid_gev(GevParams(0, 1, 0.1), 2000, seed=5)
    fit = fit_mle(x, fixed_xi=0.25)
    assert fit.model.xi == 0.25
    assert fit.fixed_xi is True
    assert fit.n_params == 2
    assert "xi" not in fit.std_errors or np.isnan(fit.std_errors["xi"])


@settings(max_examples=8, deadline=None)
@given(st.floats(0.2, 20), st.floats(-100, 100), st.integers(0, 1000))
def test_location_scale_equivariance(a, b, seed):
    x = sample_iid_gev(GevParams(3, 1.2, 0.15), 600, seed)
    f1 = fit_mle(x).model
    f2 = fit_mle(a * x + b).model
    assert f2.mu_coeffs[0] == pytest.approx(a * f1.mu_coeffs[0] + b, rel=1e-4, abs=1e-4 * a)
    assert f2.sigma_coeffs[0] == pytest.approx(a * f1.sigma_coeffs[0], rel=1e-4)
    assert f2.xi == pytest.approx(f1.xi, abs=1e-4)


@pytest.fixture(scope="module")
def linked_table():
    stations = synthetic_stations(40, seed=3)
    soi = yearly_soi_table(synthetic_soi(1960, 2009, seed=4))
    covs = station_year_table(stations, soi, range(1960, 2010))
    return sample_linked_gev(ladder_model(4), covs, seed=5)


def test_linked_recovery_within_three_se(linked_table):
    truth = ladder_model(4)
    fit = fit_mle(linked_table, ("soi", "log_cdist", "lat", "lon"))
    assert fit.converged
    est = fit.model.as_dict()
    bad = [name for name, value in truth.as_dict().items() if abs(est[name] - value) > 3 * fit.std_errors[name]]
    assert len(bad) <= 1, bad


def test_linked_optimum_is_local_minimum(linked_table):
    active = ("soi", "log_cdist", "lat", "lon")
    fit = fit_mle(linked_table, active)
    polished = minimize(
        lambda v: nll_linked(linked_table, LinkModel.from_free_vector(active, v)),
        fit.model.free_vector(),
        method="Powell",
        options={"xtol": 1e-8, "ftol": 1e-12},
    )
    assert fit.nll <= polished.fun + 1e-4


def test_record_round_trip(tmp_path, linked_table):
    fit = fit_mle(linked_table, ("soi",))
    fit.meta.update({"k": 2, "model_id": 1})
    fit.save(tmp_path / "fit.txt")
    back = FitResult.load(tmp_path / "fit.txt")
    assert back.model == fit.model
    assert back.nll == fit.nll
    assert back.meta["k"] == 2
    np.testing.assert_array_equal(back.covariance, fit.covariance)
    assert back.std_errors == fit.std_errors
    row = back.coefficient_row(2)
    assert row["k"] == 2 and row["mu2"] == 0.0


def test_regressor_api(linked_table):
    X = linked_table[["soi", "log_cdist", "lat", "lon"]]
    y = linked_table["block_max_mm"]
    reg = GEVRegressor(active=("soi",)).fit(X, y)
    params = reg.get_params()
    assert params["active"] == ("soi",)
    pred = reg.predict(X.iloc[:3], p=0.01)
    assert pred.shape == (3,)
    assert np.all(pred > reg.predict(X.iloc[:3], p=0.1))
    assert np.isfinite(reg.score(X, y))
