import itertools

import numpy as np

from dataclasses import dataclass, replace
from math import comb
from typing import Callable, Dict, Sequence, Tuple, Union

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, FreqBox, LatticeFunction, bracket

LOGGER = PDOLogger(__name__).get_logger()

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Symbol:
    """A symbol p(x,ξ) on 𝕋ⁿ×ℝⁿ with its claimed class S^m_{ρ,δ}

    The evaluator receives x as a (P, n) array of points in [0,1)^n and ξ as a (Q, n) array of real frequencies and
    must return something broadcastable to (P, Q). Symbols are restricted to ℤⁿ simply by being evaluated there.

    :param n: Dimension
    :param evaluator: The map (x, ξ) ↦ p(x, ξ)
    :param claimed_order: m
    :param claimed_rho: ρ ∈ (0,1]
    :param claimed_delta: δ ∈ [0,1)
    :param name: Label used in logs and result tables
    :param x_independent: True for Fourier multipliers, which unlocks FFT fast paths
    """

    n: int
    evaluator: Evaluator
    claimed_order: float
    claimed_rho: float = 1.0
    claimed_delta: float = 0.0
    name: str = 'symbol'
    x_independent: bool = False

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.n)
        xi = np.asarray(xi, dtype=float).reshape(-1, self.n)
        values = np.asarray(self.evaluator(x, xi), dtype=complex)
        return np.array(np.broadcast_to(values, (x.shape[0], xi.shape[0])))

    def frequency_profile(self, xi: np.ndarray) -> np.ndarray:
        """p(0, ξ) as a flat array, the full symbol of a multiplier"""
        return self(np.zeros((1, self.n)), xi)[0]

    def periodicity_defect(self, samples: int = 64, seed: int = 0) -> float:
        """max |p(x,ξ) - p(x+e_j,ξ)| over seeded samples and every axis e_j"""
        rng = np.random.default_rng(seed)
        x = rng.random((samples, self.n))
        xi = rng.uniform(-32, 32, (samples, self.n))
        reference = self(x, xi)
        defect = 0.0
        for axis in np.eye(self.n):
            defect = max(defect, float(np.max(np.abs(self(x + axis, xi) - reference))))
        return defect


def _check_multi_index(alpha: Sequence[int], n: int, label: str) -> Tuple[int, ...]:
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != n:
        raise ValueError(f'Multi-index {label} = {alpha} does not have {n} entries')
    if any(a < 0 for a in alpha):
        raise ValueError(f'Multi-index {label} = {alpha} has negative entries')
    return alpha


def multi_indices(n: int, order: int) -> Tuple[Tuple[int, ...], ...]:
    """Every α ∈ ℕ₀ⁿ with |α| ≤ order, graded then lexicographic"""
    found = [alpha for alpha in itertools.product(range(order + 1), repeat=n) if sum(alpha) <= order]
    return tuple(sorted(found, key=lambda alpha: (sum(alpha), tuple(-a for a in alpha))))


def difference_op(p: Union[Symbol, LatticeFunction], alpha: Sequence[int]) -> Union[Symbol, LatticeFunction]:
    """Forward difference Δ_ξ^α

    For a Symbol the result is another Symbol, evaluated by the binomial expansion
    Δ^α p(ξ) = Σ_{γ≤α} (-1)^{|α-γ|} C(α,γ) p(ξ+γ), which queries p outside the lattice box when ξ sits near its
    edge. For a LatticeFunction the forward differences are iterated per axis; entries whose stencil leaves the box
    are NaN.

    :param p: The symbol or lattice function to difference
    :param alpha: Multi-index of non-negative integers
    :return: Δ^α p, of the same kind as p
    """

    if isinstance(p, LatticeFunction):
        alpha = _check_multi_index(alpha, p.box.n, 'alpha')
        values = p.values.copy()
        for axis, order in enumerate(alpha):
            for _ in range(order):
                shifted = np.full_like(values, np.nan)
                index = [slice(None)] * p.box.n
                index[axis] = slice(0, -1)
                shifted[tuple(index)] = np.diff(values, axis=axis)
                values = shifted
        return LatticeFunction(p.box, values)

    alpha = _check_multi_index(alpha, p.n, 'alpha')
    if sum(alpha) == 0:
        return p

    stencil = []
    for gamma in itertools.product(*[range(a + 1) for a in alpha]):
        weight = (-1) ** (sum(alpha) - sum(gamma))
        for a, g in zip(alpha, gamma):
            weight *= comb(a, g)
        stencil.append((np.asarray(gamma, dtype=float), weight))

    def evaluator(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        total = np.zeros((x.shape[0], xi.shape[0]), dtype=complex)
        for shift, weight in stencil:
            total += weight * p(x, xi + shift)
        return total

    return replace(p, evaluator=evaluator, claimed_order=p.claimed_order - p.claimed_rho * sum(alpha),
                   name=f'D{alpha}[{p.name}]')


def x_derivative(p: Symbol, beta: Sequence[int], grid: TorusGrid,
                 xi: Union[FreqBox, np.ndarray]) -> np.ndarray:
    """Spectral x-derivative ∂_x^β p(·, ξ) for every requested ξ

    Each frequency column is transformed on the grid, multiplied by (2πi k)^β and transformed back. For odd
    orders the Nyquist mode is zeroed since its derivative is not representable.

    :param p: Symbol, assumed smooth in x
    :param beta: Multi-index of derivative orders
    :param grid: Grid that resolves p in x
    :param xi: Either a FreqBox (all lattice points) or a (Q, n) array of frequencies
    :return: Array of shape (*grid.shape, Q)
    """

    if grid.n != p.n:
        raise ValueError(f'Dimension mismatch between symbol (n = {p.n}) and grid (n = {grid.n})')
    beta = _check_multi_index(beta, p.n, 'beta')
    frequencies = xi.lattice() if isinstance(xi, FreqBox) else np.asarray(xi, dtype=float).reshape(-1, p.n)

    samples = p(grid.points(), frequencies).reshape(*grid.shape, frequencies.shape[0])
    if sum(beta) == 0:
        return samples
    if p.x_independent:
        return np.zeros_like(samples)

    axes = tuple(range(grid.n))
    spectrum = np.fft.fftn(samples, axes=axes)
    wavenumbers = np.fft.fftfreq(grid.G, d=1.0 / grid.G)
    for axis, order in enumerate(beta):
        if order == 0:
            continue
        factor = (2j * np.pi * wavenumbers) ** order
        if order % 2 == 1 and grid.G % 2 == 0:
            factor[grid.G // 2] = 0.0
        view = [1] * (grid.n + 1)
        view[axis] = grid.G
        spectrum = spectrum * factor.reshape(view)
    return np.fft.ifftn(spectrum, axes=axes)


# Smooth functions on 𝕋ⁿ addressable by name in separable symbols
SMOOTH_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'constant': lambda x: np.ones(x.shape[0]),
    'cos': lambda x: np.cos(2 * np.pi * x[:, 0]),
    'sin': lambda x: np.sin(2 * np.pi * x[:, 0]),
    'character': lambda x: np.exp(2j * np.pi * x[:, 0]),
    'wave': lambda x: 1.0 + 0.5 * np.cos(2 * np.pi * np.sum(x, axis=1)),
    'exp_cos': lambda x: np.exp(np.cos(2 * np.pi * x[:, 0])),
}


def bessel_symbol(s: float, n: int = 1) -> Symbol:
    """The Bessel potential symbol ⟨ξ⟩^s = (1+|ξ|²)^(s/2), claimed in S^s_{1,0}"""

    def evaluator(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return ((1.0 + np.sum(xi ** 2, axis=1)) ** (s / 2.0))[None, :]

    return Symbol(n=n, evaluator=evaluator, claimed_order=s, claimed_rho=1.0, claimed_delta=0.0,
                  name=f'bessel:s={s:g}', x_independent=True)


def multiplier(m: float, n: int = 1) -> Symbol:
    return replace(bessel_symbol(m, n), name=f'multiplier:m={m:g}')


def separable(phi: Union[str, Callable[[np.ndarray], np.ndarray]], m: float, n: int = 1) -> Symbol:
    """φ(x)·⟨ξ⟩^m for a smooth φ on the torus, claimed in S^m_{1,0}"""

    if isinstance(phi, str):
        if phi not in SMOOTH_FUNCTIONS:
            raise ValueError(f'Unknown smooth function "{phi}", expected one of {sorted(SMOOTH_FUNCTIONS)}')
        phi_name, phi = phi, SMOOTH_FUNCTIONS[phi]
    else:
        phi_name = getattr(phi, '__name__', 'phi')

    def evaluator(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return phi(x)[:, None] * ((1.0 + np.sum(xi ** 2, axis=1)) ** (m / 2.0))[None, :]

    return Symbol(n=n, evaluator=evaluator, claimed_order=m, claimed_rho=1.0, claimed_delta=0.0,
                  name=f'separable:phi={phi_name},m={m:g}', x_independent=(phi_name == 'constant'))


def exotic(m: float, rho: float, c: float = 1.0, n: int = 1) -> Symbol:
    """⟨ξ⟩^m · e^(i c ⟨ξ⟩^(1-ρ)), claimed in S^m_{ρ,0}

    :param m: Order
    :param rho: Type, must lie in (0,1]
    :param c: Phase constant
    :param n: Dimension
    """

    if not 0 < rho <= 1:
        raise ValueError(f'Exotic symbols need rho in (0,1] (got rho = {rho})')

    def evaluator(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        brackets = bracket(xi)
        return (brackets ** m * np.exp(1j * c * brackets ** (1.0 - rho)))[None, :]

    return Symbol(n=n, evaluator=evaluator, claimed_order=m, claimed_rho=rho, claimed_delta=0.0,
                  name=f'exotic:m={m:g},rho={rho:g},c={c:g}', x_independent=True)


def trig(radius: int = 0, m: float = 0.0, phi: str = 'constant', n: int = 1) -> Symbol:
    """φ(x)·⟨ξ⟩^m restricted to the finite lattice support |ξ|_∞ ≤ radius

    With the default arguments this is the indicator symbol of ξ = 0, whose kernel is identically one.
    """

    if radius < 0:
        raise ValueError(f'Support radius must be non-negative (got radius = {radius})')
    base = separable(phi, m, n)

    def evaluator(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        support = np.all(np.abs(xi) <= radius + 1e-9, axis=1)
        return base.evaluator(x, xi) * support[None, :]

    return Symbol(n=n, evaluator=evaluator, claimed_order=m, claimed_rho=1.0, claimed_delta=0.0,
                  name=f'trig:radius={radius},m={m:g},phi={phi}', x_independent=base.x_independent)


CATALOG: Dict[str, Callable[..., Symbol]] = {
    'bessel': bessel_symbol,
    'multiplier': multiplier,
    'separable': separable,
    'exotic': exotic,
    'trig': trig,
}

_INTEGER_PARAMS = {'n', 'radius'}
_STRING_PARAMS = {'phi'}


def catalog(kind: str, **params) -> Symbol:
    """Build a test symbol by kind name

    :param kind: One of 'bessel', 'multiplier', 'separable', 'exotic' or 'trig'
    :param params: Keyword parameters of the matching factory
    :return: The requested Symbol
    """

    if kind not in CATALOG:
        raise ValueError(f'Unknown symbol kind "{kind}", expected one of {sorted(CATALOG)}')
    try:
        return CATALOG[kind](**params)
    except TypeError as err:
        raise ValueError(f'Bad parameters {params} for symbol kind "{kind}": {err}')


def parse_symbol_spec(spec: str, **overrides) -> Symbol:
    """Parse strings such as "exotic:m=-1,rho=0.5" into a Symbol

    Keyword overrides replace (or add) parameters after parsing, which lets callers sweep one parameter of a
    configured symbol.
    """

    kind, _, param_string = spec.strip().partition(':')
    params = {}
    for item in filter(None, (chunk.strip() for chunk in param_string.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            raise ValueError(f'Symbol parameter "{item}" in "{spec}" is not of the form key=value')
        key = key.strip()
        if key in _STRING_PARAMS:
            params[key] = value.strip()
        elif key in _INTEGER_PARAMS:
            params[key] = int(value)
        else:
            params[key] = float(value)
    params.update(overrides)
    return catalog(kind.strip(), **params)
