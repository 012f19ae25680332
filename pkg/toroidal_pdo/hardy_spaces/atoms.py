import math

import numpy as np

from dataclasses import dataclass
from typing import List, Tuple, Union

from scipy import linalg

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, PeriodicFunction, ball_volume
from toroidal_pdo.symbol_calculus.symbol import multi_indices

LOGGER = PDOLogger(__name__).get_logger()

SeedLike = Union[int, np.random.SeedSequence, None]

# Resample attempts before giving up on a degenerate moment projection
MAX_ATTEMPTS = 10


def moment_order(n: int, p: float) -> int:
    """s_max = floor(n(1/p - 1))"""
    return int(math.floor(n * (1.0 / p - 1.0) + 1e-12))


@dataclass
class Atom:
    """A (p,q)-atom on the ball B(z, σ)"""

    function: PeriodicFunction
    z: np.ndarray
    sigma: float
    p: float
    q: float

    @property
    def grid(self) -> TorusGrid:
        return self.function.grid

    @property
    def s_max(self) -> int:
        return moment_order(self.grid.n, self.p)

    @property
    def bound(self) -> float:
        """|B|^(1/q - 1/p) with the analytic ball measure"""
        return ball_volume(self.sigma, self.grid.n) ** (1.0 / self.q - 1.0 / self.p)


@dataclass
class AtomReport:
    norm: float
    bound: float
    max_moment: float
    leakage: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.norm <= self.bound * (1.0 + self.tolerance) + self.tolerance
                and self.max_moment <= self.tolerance
                and self.leakage <= self.tolerance)

    def todict(self) -> dict:
        return {'norm': self.norm,
                'bound': self.bound,
                'max_moment': self.max_moment,
                'leakage': self.leakage,
                'passed': self.passed}


def _monomials(coordinates: np.ndarray, order: int) -> List[Tuple[Tuple[int, ...], np.ndarray]]:
    """u^κ for every |κ| ≤ order; coordinates has shape (n, *grid.shape)"""
    n = coordinates.shape[0]
    found = []
    for kappa in multi_indices(n, order):
        value = np.ones(coordinates.shape[1:])
        for dim, power in enumerate(kappa):
            if power:
                value = value * coordinates[dim] ** power
        found.append((kappa, value))
    return found


def _validate_ball(sigma: float, p: float, q: float) -> None:
    if not 0 < sigma < 0.5:
        raise ValueError(f'Atom radius must satisfy 0 < sigma < 1/2 so the ball embeds in a chart '
                         f'(got sigma = {sigma})')
    if not 0 < p <= 1:
        raise ValueError(f'Atom exponent must satisfy 0 < p <= 1 (got p = {p})')
    if q not in (2, math.inf):
        raise ValueError(f'Atom exponent q must be 2 or inf (got q = {q})')


def make_atom(grid: TorusGrid, z: np.ndarray, sigma: float, p: float, q: float, seed: SeedLike) -> Atom:
    """Draw a seeded (p,q)-atom on B(z, σ)

    A random smooth bump on the ball (a compactly supported bump times a random polynomial in the local coordinates
    u = (x - z)/σ) has its monomial moments up to s_max projected out against bump·u^κ, and is rescaled so that
    ‖a‖_q = |B|^(1/q - 1/p).

    :param grid: Sampling grid
    :param z: Ball centre
    :param sigma: Ball radius, below 1/2
    :param p: Hardy exponent in (0,1]
    :param q: 2 or inf
    :param seed: Anything numpy.random.default_rng accepts
    :return: The atom
    """

    _validate_ball(sigma, p, q)
    z = np.asarray(z, dtype=float).reshape(grid.n)
    rng = np.random.default_rng(seed)
    s_max = moment_order(grid.n, p)

    local = grid.local_coordinates(z) / sigma
    radius_squared = np.sum(local ** 2, axis=0)
    inside = radius_squared < 1.0
    bump = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - radius_squared, 1.0)), 0.0)

    monomials = np.stack([value.reshape(-1) for _, value in _monomials(local, s_max)], axis=0)
    shapes = _monomials(local, s_max + 2)
    basis = monomials * bump.reshape(1, -1)
    gram = basis @ monomials.T

    for attempt in range(MAX_ATTEMPTS):
        coefficients = rng.standard_normal(len(shapes))
        draw = bump * sum(c * value for c, (_, value) in zip(coefficients, shapes))
        moments = monomials @ draw.reshape(-1)
        try:
            correction = linalg.solve(gram, moments, assume_a='pos')
        except (linalg.LinAlgError, ValueError):
            LOGGER.warning(f'Singular moment system for atom at sigma = {sigma} (attempt {attempt + 1})')
            continue
        samples = draw - (correction @ basis).reshape(grid.shape)
        if np.max(np.abs(samples)) <= 1e-8 * max(np.max(np.abs(draw)), 1e-300):
            LOGGER.warning(f'Degenerate moment projection for atom at sigma = {sigma} (attempt {attempt + 1})')
            continue
        norm = grid.lp_norm(samples, q)
        target = ball_volume(sigma, grid.n) ** (1.0 / q - 1.0 / p)
        return Atom(PeriodicFunction(grid, samples * (target / norm)), z, sigma, p, q)

    raise RuntimeError(f'Could not draw a non-degenerate atom at sigma = {sigma} on grid G = {grid.G} after '
                       f'{MAX_ATTEMPTS} attempts')


def atom_validate(atom: Atom, tolerance: float = 1e-9) -> AtomReport:
    """Measured L^q norm against |B|^(1/q-1/p), the largest moment up to s_max and the support leakage

    Moments ∫ a(x)(x-z)^κ dx use periodic coordinates centred at z.
    """

    grid = atom.grid
    samples = atom.function.values
    local = grid.local_coordinates(atom.z)
    distances = np.sqrt(np.sum(local ** 2, axis=0))

    moments = [abs(grid.integrate(samples * value)) for _, value in _monomials(local, atom.s_max)]
    outside = distances >= atom.sigma
    leakage = float(np.max(np.abs(samples[outside]))) if np.any(outside) else 0.0
    return AtomReport(norm=grid.lp_norm(samples, atom.q), bound=atom.bound, max_moment=float(max(moments)),
                      leakage=leakage, tolerance=tolerance)
