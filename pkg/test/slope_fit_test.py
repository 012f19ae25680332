import math

import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from toroidal_pdo.linear_model.slope_fit import fit_slope, fit_log_slope


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_exact_lines(slope: float, intercept: float):
    """OLS recovers the slope and intercept of points on a line"""

    x = np.arange(6, dtype=float)
    fit = fit_slope('line', x, intercept + slope * x)
    assert fit.is_fitted
    assert fit.n_points == 6
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(intercept, abs=1e-9)
    assert fit.max_residual <= 1e-9


@pytest.mark.parametrize(
    argnames=['x', 'y', 'fitted', 'n_points'],
    argvalues=zip([[1.0], [1.0, 1.0], [1.0, 2.0], [1.0, 2.0, np.nan]],
                  [[2.0], [2.0, 3.0], [2.0, 3.0], [2.0, 3.0, 4.0]],
                  [False, False, True, True],
                  [1, 2, 2, 2])
)
def test_degenerate_inputs(x: list, y: list, fitted: bool, n_points: int):
    """Too few or coincident regressors leave the fit empty; two points fit without a standard error

    1. A single point
    2. Two points sharing x
    3. Two distinct points
    4. Non-finite entries are dropped

    :param x: Regressor
    :param y: Response
    :param fitted: Whether a slope is expected
    :param n_points: Points kept
    """

    fit = fit_slope('degenerate', x, y)
    assert fit.is_fitted is fitted
    assert fit.n_points == n_points
    if fitted:
        assert fit.slope == pytest.approx(1.0)
        assert math.isnan(fit.std_err)
    assert set(fit.todict()) == {'label', 'n_points', 'slope', 'intercept', 'std_err', 'max_residual'}


def test_log_slopes():
    j = np.arange(1, 6, dtype=float)
    assert fit_log_slope('decay', j, 2.0 ** (-j)).slope == pytest.approx(-1.0)
    sigma = 2.0 ** -np.arange(3, 8, dtype=float)
    assert fit_log_slope('power', sigma, 3.0 * sigma ** 0.5, log_x=True).slope == pytest.approx(0.5)

    with_zero = fit_log_slope('zeros', j, np.array([0.5, 0.25, 0.0, 0.0625, 0.03125]))
    assert with_zero.n_points == 4
    assert with_zero.slope == pytest.approx(-1.0)
