"""Torus grids, truncated frequency lattices and the toroidal Fourier transform pair.

All arrays bind to two fixed orders:

* grid samples are stored as an n-dimensional array of shape (G,)*n, sample k sits at x_k = k/G;
* lattice values are stored as an n-dimensional array of shape (2N+1,)*n, entry i sits at ξ = i - N. Flattening in
  C order therefore enumerates [-N,N]^n lexicographically (first coordinate most significant).
"""

import math

import numpy as np

from dataclasses import dataclass
from typing import Tuple, Union

from scipy.special import gamma

from toroidal_pdo.pdo_logger import PDOLogger

LOGGER = PDOLogger(__name__).get_logger()


def bracket(xi: np.ndarray) -> np.ndarray:
    """Japanese bracket ⟨ξ⟩ = (1+|ξ|²)^(1/2) along the last axis"""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + np.sum(xi ** 2, axis=-1))


def periodic_difference(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Componentwise representative of x - z in [-1/2, 1/2]"""
    diff = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
    return diff - np.round(diff)


def periodic_distance(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """dist(x,z) = min over κ∈ℤⁿ of |x - z + κ|, taken along the last axis"""
    return np.sqrt(np.sum(periodic_difference(x, z) ** 2, axis=-1))


def ball_volume(radius: float, n: int) -> float:
    """Analytic measure of B(z, radius) on the torus, min(ω_n r^n, 1)

    :param radius: Ball radius
    :param n: Dimension of the torus
    :return: Measure of the ball clipped at the volume of the torus
    """

    if radius <= 0:
        return 0.0
    unit_volume = math.pi ** (n / 2) / gamma(n / 2 + 1)
    return float(min(unit_volume * radius ** n, 1.0))


@dataclass(frozen=True)
class TorusGrid:
    """A uniform grid with G points per axis on the n-torus [0,1)^n"""

    n: int
    G: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f'Torus dimension must be a positive integer (got n = {self.n})')
        if self.G < 1:
            raise ValueError(f'Points per axis must be a positive integer (got G = {self.G})')
        if self.G & (self.G - 1) != 0:
            LOGGER.warning(f'Grid size G = {self.G} is not a power of two, FFTs will be slower')

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.G,) * self.n

    @property
    def size(self) -> int:
        return self.G ** self.n

    @property
    def cell_volume(self) -> float:
        return float(self.G) ** (-self.n)

    def axis(self) -> np.ndarray:
        return np.arange(self.G) / self.G

    def points(self) -> np.ndarray:
        """All sample points as a (G^n, n) array in storage order"""
        axes = np.meshgrid(*([self.axis()] * self.n), indexing='ij')
        return np.stack([ax.reshape(-1) for ax in axes], axis=-1)

    def local_coordinates(self, z: np.ndarray) -> np.ndarray:
        """Periodic representatives of x - z for every grid point

        :param z: Centre on the torus
        :return: An array of shape (n, *shape) holding the wrapped coordinate differences
        """

        z = np.asarray(z, dtype=float).reshape(self.n)
        coords = []
        for dim in range(self.n):
            wrapped = periodic_difference(self.axis(), z[dim])
            view = [1] * self.n
            view[dim] = self.G
            coords.append(np.broadcast_to(wrapped.reshape(view), self.shape))
        return np.stack(coords, axis=0)

    def distance_to(self, z: np.ndarray) -> np.ndarray:
        """Periodic distance from z to every grid point, shape (G,)*n"""
        return np.sqrt(np.sum(self.local_coordinates(z) ** 2, axis=0))

    def integrate(self, values: np.ndarray) -> complex:
        """Uniform Riemann sum with weight G^(-n)"""
        return np.sum(values) * self.cell_volume

    def lp_norm(self, values: np.ndarray, p: float) -> float:
        """L^p (quasi-)norm by grid quadrature; p = inf gives the sup norm"""
        magnitude = np.abs(values)
        if np.isinf(p):
            return float(np.max(magnitude)) if magnitude.size else 0.0
        return float(np.sum(magnitude ** p) * self.cell_volume) ** (1.0 / p)

    def grid_ball_volume(self, z: np.ndarray, radius: float) -> float:
        """Grid-counting estimate of |B(z, radius)|"""
        return float(np.count_nonzero(self.distance_to(z) < radius)) * self.cell_volume


@dataclass(frozen=True)
class FreqBox:
    """The truncated lattice ℤⁿ∩[-N,N]ⁿ"""

    n: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f'Lattice dimension must be a positive integer (got n = {self.n})')
        if self.N < 0:
            raise ValueError(f'Truncation radius must be non-negative (got N = {self.N})')

    @property
    def side(self) -> int:
        return 2 * self.N + 1

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.side,) * self.n

    @property
    def size(self) -> int:
        return self.side ** self.n

    def lattice(self) -> np.ndarray:
        """Lattice points as a (size, n) integer array in lexicographic order"""
        axes = np.meshgrid(*([np.arange(-self.N, self.N + 1)] * self.n), indexing='ij')
        return np.stack([ax.reshape(-1) for ax in axes], axis=-1)

    def brackets(self) -> np.ndarray:
        """⟨ξ⟩ over the lattice, shaped like the lattice values"""
        return bracket(self.lattice()).reshape(self.shape)

    def index_of(self, xi: np.ndarray) -> int:
        xi = np.asarray(xi, dtype=int).reshape(self.n)
        if np.any(np.abs(xi) > self.N):
            raise ValueError(f'Frequency {tuple(xi)} lies outside the box [-{self.N},{self.N}]^{self.n}')
        return int(np.ravel_multi_index(tuple(xi + self.N), self.shape))

    def check_grid(self, grid: TorusGrid) -> None:
        """Raise unless the box can be resolved on grid without aliasing"""
        if grid.n != self.n:
            raise ValueError(f'Dimension mismatch between grid (n = {grid.n}) and frequency box (n = {self.n})')
        if 2 * self.N >= grid.G:
            raise ValueError(f'Frequency box N = {self.N} is too large for grid G = {grid.G} (require 2N < G)')


@dataclass
class PeriodicFunction:
    """Complex samples of a 1-periodic function on a TorusGrid"""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise ValueError(f'Expected {self.grid.size} samples for grid {self.grid.shape}, got {values.size}')
        self.values = values.reshape(self.grid.shape)

    def lp_norm(self, p: float) -> float:
        return self.grid.lp_norm(self.values, p)

    def integral(self) -> complex:
        return self.grid.integrate(self.values)

    def inner(self, other: 'PeriodicFunction') -> complex:
        """⟨f, g⟩ = ∫ f conj(g)"""
        return self.grid.integrate(self.values * np.conj(other.values))

    def __add__(self, other: 'PeriodicFunction') -> 'PeriodicFunction':
        return PeriodicFunction(self.grid, self.values + other.values)

    def __sub__(self, other: 'PeriodicFunction') -> 'PeriodicFunction':
        return PeriodicFunction(self.grid, self.values - other.values)

    def scale(self, factor: complex) -> 'PeriodicFunction':
        return PeriodicFunction(self.grid, self.values * factor)


@dataclass
class LatticeFunction:
    """Complex values on a FreqBox"""

    box: FreqBox
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.box.size:
            raise ValueError(f'Expected {self.box.size} lattice values for box N = {self.box.N}, got {values.size}')
        self.values = values.reshape(self.box.shape)

    def at(self, xi: np.ndarray) -> complex:
        return self.values.reshape(-1)[self.box.index_of(xi)]


def _box_indices(box: FreqBox, grid: TorusGrid) -> Tuple[np.ndarray, ...]:
    wrapped = np.arange(-box.N, box.N + 1) % grid.G
    return np.ix_(*([wrapped] * box.n))


def forward_ft(f: PeriodicFunction, box: FreqBox) -> LatticeFunction:
    """Toroidal Fourier transform ∫ e^(-2πi x·ξ) f(x) dx on the lattice box

    The integral is the uniform Riemann sum, evaluated through a size-G^n FFT. Coefficients are exact for
    trigonometric polynomials of degree < G/2.

    :param f: Samples on a torus grid
    :param box: Frequencies to retain
    :return: The retained Fourier coefficients
    """

    box.check_grid(f.grid)
    coefficients = np.fft.fftn(f.values) * f.grid.cell_volume
    return LatticeFunction(box, coefficients[_box_indices(box, f.grid)])


def inverse_ft(phi: LatticeFunction, grid: TorusGrid) -> PeriodicFunction:
    """Σ_ξ e^(2πi x·ξ) φ(ξ) sampled on grid"""

    phi.box.check_grid(grid)
    spectrum = np.zeros(grid.shape, dtype=complex)
    spectrum[_box_indices(phi.box, grid)] = phi.values
    return PeriodicFunction(grid, np.fft.ifftn(spectrum) * grid.size)


def character_matrix(points: np.ndarray, lattice: np.ndarray) -> np.ndarray:
    """e^(2πi x·ξ) for every (point, frequency) pair, shape (P, Q)"""
    return np.exp(2j * np.pi * (np.asarray(points, dtype=float) @ np.asarray(lattice, dtype=float).T))


def forward_ft_direct(f: PeriodicFunction, box: FreqBox) -> LatticeFunction:
    """Direct O(G^n (2N+1)^n) summation of the forward transform"""
    box.check_grid(f.grid)
    phases = np.conj(character_matrix(f.grid.points(), box.lattice()))
    return LatticeFunction(box, (f.values.reshape(-1) @ phases) * f.grid.cell_volume)


def inverse_ft_direct(phi: LatticeFunction, grid: TorusGrid) -> PeriodicFunction:
    """Direct summation of the inverse transform"""
    phi.box.check_grid(grid)
    phases = character_matrix(grid.points(), phi.box.lattice())
    return PeriodicFunction(grid, phases @ phi.values.reshape(-1))


def schwartz_decay_report(phi: LatticeFunction, M: float) -> float:
    """Decay constant C = max over the lattice of |φ(ξ)|·⟨ξ⟩^M

    :param phi: Lattice values
    :param M: Decay order, must be positive
    :return: The constant C_{φM}
    """

    if M <= 0:
        raise ValueError(f'Decay order must be positive (got M = {M})')
    if phi.values.size == 0:
        raise ValueError('Cannot report decay of an empty lattice function')
    return float(np.max(np.abs(phi.values) * phi.box.brackets() ** M))


def as_periodic(grid: TorusGrid, values: Union[np.ndarray, complex]) -> PeriodicFunction:
    """Broadcast scalars or arrays onto grid"""
    return PeriodicFunction(grid, np.broadcast_to(np.asarray(values, dtype=complex), grid.shape))
