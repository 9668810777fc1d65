import datetime as dt
import warnings

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiday_extremes.functionals import (
    BLOCK_MAXIMA_COLUMNS,
    WindowedMinimum,
    block_maxima,
    build_block_maxima_table,
    read_block_maxima_csv,
    windowed_min,
    write_block_maxima_csv,
)
from multiday_extremes.ingest import DailySeries, StationMeta


def series(values, start=dt.date(2001, 1, 1)):
    return DailySeries("W", start, np.asarray(values, float))


def test_windowed_min_k2():
    np.testing.assert_array_equal(windowed_min(series([3, 1, 4, 1, 5]), 2).values, [1, 1, 1, 1])


def test_windowed_min_k3():
    np.testing.assert_array_equal(windowed_min(series([3, 1, 4, 1, 5]), 3).values, [1, 1, 1])


def test_windowed_min_k1_identity():
    x = [0.0, 2.5, 9.0, 1.0]
    np.testing.assert_array_equal(windowed_min(series(x), 1).values, x)


def test_windowed_min_bad_k():
    with pytest.raises(ValueError):
        windowed_min(series([1, 2]), 0)


def test_windowed_min_warns_above_three():
    with pytest.warns(UserWarning):
        windowed_min(series(np.ones(10)), 4)


def test_windowed_min_missing_window_is_dropped():
    y = windowed_min(series([1, np.nan, 3, 4]), 2).values
    assert np.isnan(y[0]) and np.isnan(y[1]) and y[2] == 3


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=40), st.integers(1, 3))
def test_windowed_min_matches_brute_force(x, k):
    if k > len(x):
        return
    got = windowed_min(series(x), k).values
    assert got.size == len(x) - k + 1
    np.testing.assert_array_equal(got, [min(x[j : j + k]) for j in range(len(x) - k + 1)])


def test_windowed_min_not_permutation_invariant():
    x = [0, 9, 9, 0, 0, 0]
    shuffled = [0, 9, 0, 9, 0, 0]
    assert windowed_min(series(x), 2).values.max() != windowed_min(series(shuffled), 2).values.max()


def test_block_maxima_single_year():
    bm = block_maxima(windowed_min(series([1, 1, 1, 1, 1]), 2), {2001})
    assert bm["block_max_mm"].tolist() == [1.0]


def test_block_maxima_picks_max():
    bm = block_maxima(windowed_min(series([0, 12.4, 3.3]), 1), {2001})
    assert bm["block_max_mm"].tolist() == [12.4]


def test_block_maxima_two_years():
    # Dec 30, Dec 31 in 2001; Jan 1 in 2002
    w = windowed_min(series([5, 7, 2], start=dt.date(2001, 12, 30)), 1)
    bm = block_maxima(w, {2001, 2002})
    assert list(zip(bm["year"], bm["block_max_mm"])) == [(2001, 7.0), (2002, 2.0)]


def test_window_straddling_new_year_counts_for_earlier_year():
    w = windowed_min(series([0, 8, 9, 0], start=dt.date(2001, 12, 30)), 2)
    bm = block_maxima(w, {2001, 2002})
    assert bm.set_index("year").loc[2001, "block_max_mm"] == 8.0


def test_block_maxima_skips_inadmissible():
    bm = block_maxima(windowed_min(series(np.ones(400)), 1), {2002, 2003})
    assert bm["year"].tolist() == [2002]
    assert bm.attrs["skipped_years"] == [2003]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 200, allow_nan=False), min_size=1, max_size=40), st.integers(0, 2**32 - 1))
def test_block_maxima_monotone_in_k(head, seed):
    # a hypothesis-chosen head followed by two years of seeded noise
    x = np.concatenate([head, np.random.default_rng(seed).gamma(0.5, 10.0, 730)])
    s = series(x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prev = None
        for k in range(1, 5):
            bm = block_maxima(windowed_min(s, k), {2001, 2002})["block_max_mm"].to_numpy()
            if prev is not None:
                assert np.all(bm <= prev)
            prev = bm


def test_build_table_and_csv_round_trip(tmp_path):
    s = DailySeries("W", dt.date(2001, 1, 1), np.arange(730, dtype=float) % 50)
    table = build_block_maxima_table(
        [s], {"W": StationMeta("W", -30, 150, 20.0)}, {2001: 1.5, 2002: -2.0}, [1, 2]
    )
    assert list(table.columns) == list(BLOCK_MAXIMA_COLUMNS)
    assert len(table) == 4
    write_block_maxima_csv(table, tmp_path / "bm.csv", float_format=None)
    back = read_block_maxima_csv(tmp_path / "bm.csv")
    pd.testing.assert_frame_equal(back, table, check_dtype=False)


def test_build_table_drops_years_without_soi():
    s = DailySeries("W", dt.date(2001, 1, 1), np.ones(730))
    table = build_block_maxima_table([s], {"W": StationMeta("W", -30, 150, 20.0)}, {2002: 0.0}, [1])
    assert table["year"].tolist() == [2002]


def test_transformer_api():
    X = np.array([[3, 0], [1, 2], [4, 5], [1, 1], [5, 7]], float)
    out = WindowedMinimum(k=2).fit_transform(X)
    np.testing.assert_array_equal(out[:, 0], [1, 1, 1, 1])
    np.testing.assert_array_equal(out[:, 1], [0, 2, 1, 1])
    assert WindowedMinimum(k=3).get_params() == {"k": 3}
