import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from toroidal_pdo.torus_fft import TorusGrid, FreqBox, LatticeFunction, bracket
from toroidal_pdo.symbol_calculus import Symbol, catalog, parse_symbol_spec, difference_op, x_derivative, \
    multiplier, separable, exotic, trig, bessel_symbol, class_membership
from toroidal_pdo.symbol_calculus.symbol import multi_indices


@pytest.mark.parametrize(
    argnames=['spec', 'name', 'order', 'rho', 'x_independent'],
    argvalues=zip(['multiplier:m=-1', 'bessel:s=2', 'exotic:m=-1,rho=0.5', 'separable:phi=cos,m=0',
                   'trig:radius=3,m=0,phi=wave', 'multiplier:m=0.5,n=2'],
                  ['multiplier:m=-1', 'bessel:s=2', 'exotic:m=-1,rho=0.5,c=1', 'separable:phi=cos,m=0',
                   'trig:radius=3,m=0,phi=wave', 'multiplier:m=0.5'],
                  [-1.0, 2.0, -1.0, 0.0, 0.0, 0.5],
                  [1.0, 1.0, 0.5, 1.0, 1.0, 1.0],
                  [True, True, True, False, False, True])
)
def test_parse_symbol_spec(spec: str, name: str, order: float, rho: float, x_independent: bool):
    """Catalogue strings produce symbols with the expected claims

    1. A plain multiplier
    2. The Bessel potential
    3. An exotic symbol of type rho = 1/2
    4. An x-dependent separable symbol
    5. A trigonometric symbol with finite lattice support
    6. A multiplier in two dimensions, with the integer parameter n parsed as such

    :param spec: Catalogue string
    :param name: Expected symbol name
    :param order: Expected claimed order
    :param rho: Expected claimed rho
    :param x_independent: Expected x-independence flag
    """

    symbol = parse_symbol_spec(spec)
    assert symbol.name == name
    assert symbol.claimed_order == order
    assert symbol.claimed_rho == rho
    assert symbol.x_independent is x_independent


@pytest.mark.parametrize(
    argnames=['spec'],
    argvalues=zip(['bogus:m=1', 'multiplier:q=1', 'multiplier:m', 'exotic:m=-1,rho=0', 'separable:phi=tan,m=0',
                   'trig:radius=-1'])
)
def test_bad_symbol_specs(spec: str):
    """Unknown kinds, unknown or malformed parameters and out-of-range parameters are rejected with ValueError

    :param spec: A catalogue string that must not parse
    """

    with pytest.raises(ValueError):
        parse_symbol_spec(spec)


def test_parse_overrides():
    symbol = parse_symbol_spec('multiplier:m=-1', m=0.5, n=2)
    assert symbol.claimed_order == 0.5
    assert symbol.n == 2
    with pytest.raises(ValueError):
        catalog('multiplier', m=1, colour='red')


def test_symbol_evaluation_shape():
    symbol = separable('cos', -1.0)
    x = np.linspace(0, 1, 5, endpoint=False)[:, None]
    xi = np.arange(-3, 4)[:, None]
    values = symbol(x, xi)
    assert values.shape == (5, 7)
    expected = np.cos(2 * np.pi * x[:, 0])[:, None] * bracket(xi)[None, :] ** -1.0
    assert np.allclose(values, expected)
    assert symbol.periodicity_defect() <= 1e-9


def test_trig_support():
    symbol = trig(radius=2, m=0.0)
    xi = np.arange(-4, 5)[:, None]
    values = symbol(np.zeros((1, 1)), xi)[0]
    assert np.all(values[np.abs(xi[:, 0]) <= 2] == 1.0)
    assert np.all(values[np.abs(xi[:, 0]) > 2] == 0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.0, 2.0), st.integers(-20, 20))
def test_first_difference_of_multiplier(m: float, frequency: int):
    """Δ p(ξ) = p(ξ+1) - p(ξ) and the claimed order drops by ρ"""

    symbol = multiplier(m)
    differenced = difference_op(symbol, (1,))
    xi = np.array([[frequency]], dtype=float)
    expected = bracket(xi + 1) ** m - bracket(xi) ** m
    assert differenced(np.zeros((1, 1)), xi)[0, 0] == pytest.approx(expected[0], abs=1e-12)
    assert differenced.claimed_order == pytest.approx(m - 1.0)


@pytest.mark.parametrize(
    argnames=['alpha', 'expected'],
    argvalues=zip([(0,), (1,), (2,)],
                  [[1.0, 4.0, 9.0, 16.0, 25.0],
                   [3.0, 5.0, 7.0, 9.0, np.nan],
                   [2.0, 2.0, 2.0, np.nan, np.nan]])
)
def test_lattice_differences(alpha: tuple, expected: list):
    """Forward differences of ξ ↦ (ξ+3)² on the box of radius 2

    1. The zero multi-index returns the values
    2. First differences, with the last entry NaN since its stencil leaves the box
    3. Second differences are constant, the last two entries NaN

    :param alpha: Multi-index
    :param expected: Expected values in lattice order
    """

    box = FreqBox(1, 2)
    phi = LatticeFunction(box, (box.lattice()[:, 0] + 3.0) ** 2)
    result = difference_op(phi, alpha).values
    np.testing.assert_allclose(result, np.array(expected))


def test_negative_multi_index_rejected():
    with pytest.raises(ValueError):
        difference_op(multiplier(0.0), (-1,))
    with pytest.raises(ValueError):
        difference_op(multiplier(0.0), (1, 0))
    with pytest.raises(ValueError):
        x_derivative(separable('cos', 0.0), (-1,), TorusGrid(1, 16), FreqBox(1, 2))


def test_multi_indices():
    assert multi_indices(1, 2) == ((0,), (1,), (2,))
    assert len(multi_indices(2, 2)) == 6
    assert multi_indices(2, 0) == ((0, 0),)


def test_spectral_x_derivative():
    """∂_x [cos(2πx)⟨ξ⟩^-1] = -2π sin(2πx)⟨ξ⟩^-1 to spectral accuracy, and x-independent symbols give zero"""

    grid, box = TorusGrid(1, 32), FreqBox(1, 4)
    derivative = x_derivative(separable('cos', -1.0), (1,), grid, box)
    x = grid.axis()
    expected = -2 * np.pi * np.sin(2 * np.pi * x)[:, None] * bracket(box.lattice())[None, :] ** -1.0
    assert derivative.shape == (32, box.size)
    assert np.max(np.abs(derivative - expected)) <= 1e-9

    assert np.all(x_derivative(multiplier(-1.0), (1,), grid, box) == 0.0)
    zeroth = x_derivative(multiplier(-1.0), (0,), grid, box)
    assert np.allclose(zeroth, bracket(box.lattice())[None, :] ** -1.0)


@pytest.mark.parametrize(
    argnames=['symbol', 'claimed_order', 'passed'],
    argvalues=zip([bessel_symbol(1.0), bessel_symbol(1.0), multiplier(-1.0), separable('cos', 0.0)],
                  [1.0, 0.0, -1.0, 0.0],
                  [True, False, True, True])
)
def test_class_membership(symbol: Symbol, claimed_order: float, passed: bool):
    """Sampled Hörmander constants are N-stable for correct claims and blow up for under-claimed orders

    1. ⟨ξ⟩ claimed in S^1_{1,0}
    2. ⟨ξ⟩ claimed in S^0_{1,0}, where C_{00} grows like N
    3. ⟨ξ⟩^-1 claimed in S^-1_{1,0}
    4. cos(2πx) claimed in S^0_{1,0}

    :param symbol: Symbol to test
    :param claimed_order: Order m of the claim
    :param passed: Expected verdict
    """

    report = class_membership(symbol, claimed_order, 1.0, 0.0, 2, 1, FreqBox(1, 16), TorusGrid(1, 64))
    assert report.passed is passed
    assert len(report.to_frame()) == len(multi_indices(1, 2)) * len(multi_indices(1, 1))
    if not passed:
        assert report.ratio(((0,), (0,))) >= 1.3
        assert len(report.failures()) > 0


def test_class_membership_exotic():
    """e^(i⟨ξ⟩^(1/2)) loses only ρ = 1/2 per difference"""

    symbol = exotic(0.0, 0.5)
    report = class_membership(symbol, 0.0, 0.5, 0.0, 1, 0, FreqBox(1, 64), TorusGrid(1, 16), stability=1.2)
    assert report.passed
    wrong_type = class_membership(symbol, 0.0, 1.0, 0.0, 1, 0, FreqBox(1, 64), TorusGrid(1, 16), stability=1.2)
    assert not wrong_type.passed


@pytest.mark.parametrize(
    argnames=['G'],
    argvalues=zip([64, 128])
)
def test_second_x_derivative_matches_finite_differences(G: int):
    """∂_x² [cos(2πx)⟨ξ⟩] is -4π² cos(2πx)⟨ξ⟩ and agrees with the centred second difference up to (2π/G)²/12

    :param G: Points per axis
    """

    grid, box = TorusGrid(1, G), FreqBox(1, 8)
    symbol = separable('cos', 1.0)
    derivative = x_derivative(symbol, (2,), grid, box)

    samples = symbol(grid.points(), box.lattice())
    step = 1.0 / G
    finite_difference = (np.roll(samples, -1, axis=0) - 2 * samples + np.roll(samples, 1, axis=0)) / step ** 2
    scale = float(np.max(np.abs(derivative)))
    assert np.max(np.abs(derivative - finite_difference)) <= 1.05 * (2 * np.pi * step) ** 2 / 12 * scale

    expected = -4 * np.pi ** 2 * np.cos(2 * np.pi * grid.axis())[:, None] * bracket(box.lattice())[None, :]
    assert np.max(np.abs(derivative - expected)) <= 1e-8 * scale


def test_class_membership_exotic_second_differences():
    """⟨ξ⟩^-1 e^(i⟨ξ⟩^(1/2)) keeps N-stable constants up to |α| = 2 in S^-1_{1/2,0} at the default stability"""

    symbol = exotic(-1.0, 0.5)
    report = class_membership(symbol, -1.0, 0.5, 0.0, 2, 0, FreqBox(1, 16), TorusGrid(1, 16))
    assert report.stability == 1.1
    assert report.passed, report.failures()
    assert all(report.ratio(pair) <= 1.1 for pair in report.constants)
    assert len(report.constants) == 3

    wrong_type = class_membership(symbol, -1.0, 1.0, 0.0, 2, 0, FreqBox(1, 16), TorusGrid(1, 16))
    assert not wrong_type.passed


def test_class_membership_errors():
    with pytest.raises(ValueError):
        class_membership(multiplier(0.0), 0.0, 1.0, 0.0, -1, 0, FreqBox(1, 4), TorusGrid(1, 16))
    with pytest.raises(ValueError):
        class_membership(multiplier(0.0, n=2), 0.0, 1.0, 0.0, 1, 0, FreqBox(1, 4), TorusGrid(1, 16))
