import numpy as np

from multiday_extremes.optimize import nelder_mead


def rosenbrock(v):
    return (1 - v[0]) ** 2 + 100 * (v[1] - v[0] ** 2) ** 2


def test_rosenbrock():
    res = nelder_mead(rosenbrock, np.array([-1.2, 1.0]), step=0.5)
    assert res.converged
    np.testing.assert_allclose(res.x, [1, 1], atol=1e-5)


def test_quadratic_in_ten_dimensions():
    target = np.arange(10.0)
    res = nelder_mead(lambda v: float(np.sum((v - target) ** 2)), np.zeros(10), step=1.0)
    assert res.converged
    np.testing.assert_allclose(res.x, target, atol=1e-4)


def test_evaluation_cap():
    res = nelder_mead(rosenbrock, np.array([-1.2, 1.0]), max_evals=30)
    assert not res.converged
    assert res.n_evals <= 31
