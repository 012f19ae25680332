import math

import numpy as np
import pytest

from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from toroidal_pdo.torus_fft import TorusGrid, PeriodicFunction, periodic_distance
from toroidal_pdo.hardy_spaces import BallFamily, bmo_norm, maximal_p, sharp_maximal

GRID = TorusGrid(1, 16)
FAMILY = BallFamily(GRID)
bounded_entries = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def test_ball_family():
    assert FAMILY.radii == (0.5, 0.25, 0.125, 0.0625, math.inf)
    assert FAMILY.offsets(0.0625).tolist() == [[0]]
    assert len(FAMILY.offsets(0.125)) == 3
    assert len(FAMILY.offsets(0.5)) == 15
    assert len(FAMILY.offsets(math.inf)) == 16
    assert BallFamily(GRID, include_torus=False).radii[-1] == 0.0625


def test_constant_functions_have_no_oscillation():
    f = PeriodicFunction(GRID, np.full(16, 3.0 - 1.0j))
    sharp = sharp_maximal(f, FAMILY)
    assert np.max(np.abs(sharp.values.values)) <= 1e-12
    assert np.max(np.abs(sharp.mean_centered.values)) <= 1e-12
    assert bmo_norm(f, FAMILY) <= 1e-12
    assert np.allclose(maximal_p(f, 1.0, FAMILY).values, math.sqrt(10.0))


@settings(max_examples=25, deadline=None)
@given(arrays(dtype=np.float64, shape=16, elements=bounded_entries))
def test_pointwise_orderings(values: np.ndarray):
    """|f| ≤ M_1 f ≤ M_2 f ≤ M_∞ f, f^# ≤ mean-centred f^# ≤ 2 M_1 f, and bmo(f) ≤ 2‖f‖_∞ over one ball family"""

    f = PeriodicFunction(GRID, values)
    slack = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    first = maximal_p(f, 1.0, FAMILY).values.real
    second = maximal_p(f, 2.0, FAMILY).values.real
    sup = maximal_p(f, math.inf, FAMILY).values.real
    sharp = sharp_maximal(f, FAMILY)

    assert np.all(np.abs(values) <= first + slack)
    assert np.all(first <= second + slack)
    assert np.all(second <= sup + slack)
    assert np.all(sharp.values.values.real <= sharp.mean_centered.values.real + slack)
    assert np.all(sharp.mean_centered.values.real <= 2.0 * first + slack)
    assert bmo_norm(f, FAMILY) <= 2.0 * f.lp_norm(math.inf) + slack
    assert np.max(sharp.mean_centered.values.real) == pytest.approx(bmo_norm(f, FAMILY), abs=slack)


def test_median_centring_of_a_step():
    """For the indicator of half the torus the whole-torus ball has mean oscillation 1/2 and median oscillation 1/2"""

    values = np.concatenate([np.ones(8), np.zeros(8)])
    sharp = sharp_maximal(PeriodicFunction(GRID, values), FAMILY)
    assert np.max(sharp.values.values.real) == pytest.approx(0.5)
    assert bmo_norm(PeriodicFunction(GRID, values), FAMILY) == pytest.approx(0.5)


def test_two_dimensional_family():
    grid = TorusGrid(2, 8)
    f = PeriodicFunction(grid, np.cos(2 * np.pi * grid.points()[:, 0]))
    family = BallFamily(grid)
    assert family.radii == (0.5, 0.25, 0.125, math.inf)
    assert 0.0 < bmo_norm(f, family) <= 2.0
    assert maximal_p(f, 1.0, family).values.shape == (8, 8)


@pytest.mark.parametrize(
    argnames=['p'],
    argvalues=zip([0.5, 0.0, -1.0])
)
def test_maximal_exponent_errors(p: float):
    """Exponents below 1 are rejected

    :param p: Maximal exponent
    """

    with pytest.raises(ValueError):
        maximal_p(PeriodicFunction(GRID, np.ones(16)), p, FAMILY)


def test_family_grid_mismatch():
    with pytest.raises(ValueError):
        bmo_norm(PeriodicFunction(TorusGrid(1, 32), np.ones(32)), FAMILY)


def brute_force_maximal(values: np.ndarray, statistic) -> np.ndarray:
    """Loop over every ball B(c, r) of FAMILY and every x ∈ B, keeping the sup of statistic over the ball samples"""

    points = GRID.points()
    result = np.zeros(GRID.size)
    for radius in FAMILY.radii:
        for centre in points:
            inside = np.ones(GRID.size, dtype=bool) if math.isinf(radius) else \
                periodic_distance(points, centre[None, :]) < radius
            result[inside] = np.maximum(result[inside], statistic(values[inside]))
    return result


def least_oscillation(samples: np.ndarray) -> float:
    """inf_c mean |s - c|, attained at one of the samples since the objective is convex and piecewise linear"""
    return min(float(np.mean(np.abs(samples - c))) for c in samples)


@pytest.mark.parametrize(
    argnames=['p'],
    argvalues=zip([1.0, 2.0, math.inf])
)
def test_maximal_p_matches_brute_force(p: float):
    """M_p of the indicator of [0, 1/4) agrees exactly with a direct loop over the balls containing each point

    :param p: Maximal exponent
    """

    values = (GRID.axis() < 0.25).astype(float)
    if math.isinf(p):
        expected = brute_force_maximal(values, np.max)
    else:
        expected = brute_force_maximal(values, lambda samples: np.mean(samples ** p) ** (1.0 / p))

    computed = maximal_p(PeriodicFunction(GRID, values), p, FAMILY).values.real
    assert np.max(np.abs(computed - expected)) <= 1e-12


def test_sharp_maximal_matches_brute_force():
    """f^# of cos(2πx) agrees with a direct loop that minimises over every constant c taken from the ball"""

    values = np.cos(2 * np.pi * GRID.axis())
    sharp = sharp_maximal(PeriodicFunction(GRID, values), FAMILY)

    expected = brute_force_maximal(values, least_oscillation)
    mean_centred = brute_force_maximal(values, lambda samples: np.mean(np.abs(samples - np.mean(samples))))
    assert np.max(np.abs(sharp.values.values.real - expected)) <= 1e-12
    assert np.max(np.abs(sharp.mean_centered.values.real - mean_centred)) <= 1e-12


def test_bmo_norm_is_stable_under_refinement():
    """bmo(cos 2πx) is 2/π up to quadrature error and barely moves when the grid is doubled"""

    norms = []
    for G in (64, 128):
        grid = TorusGrid(1, G)
        norms.append(bmo_norm(PeriodicFunction(grid, np.cos(2 * np.pi * grid.axis())), BallFamily(grid)))
    assert abs(norms[1] - norms[0]) <= 0.02
    assert norms[1] == pytest.approx(2.0 / math.pi, abs=0.03)
