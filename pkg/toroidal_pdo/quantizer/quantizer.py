import math

import numpy as np

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, FreqBox, PeriodicFunction, LatticeFunction, forward_ft, \
    inverse_ft, character_matrix, as_periodic
from toroidal_pdo.symbol_calculus.symbol import Symbol
from toroidal_pdo.hardy_spaces.maximal import BallFamily, bmo_norm

LOGGER = PDOLogger(__name__).get_logger()

# Upper bound on the number of entries of a (points × frequencies) block held in memory at once
CHUNK_ENTRIES = 2 ** 22


def _flat_exp(s: np.ndarray) -> np.ndarray:
    """h(s) = e^(-1/s) for s > 0 and 0 otherwise"""
    positive = s > 0
    return np.where(positive, np.exp(-1.0 / np.where(positive, s, 1.0)), 0.0)


def flat_bump(t: np.ndarray) -> np.ndarray:
    """Smooth radial cutoff χ with χ ≡ 1 on [0,1/2] and support in [0,1]

    χ(t) = h(1-t) / (h(1-t) + h(t-1/2)) with h(s) = e^(-1/s), which is infinitely flat at both ends of the
    transition.
    """

    t = np.asarray(t, dtype=float)
    upper = _flat_exp(1.0 - t)
    lower = _flat_exp(t - 0.5)
    total = upper + lower
    return np.where(total > 0, upper / np.where(total > 0, total, 1.0), np.where(t <= 0.5, 1.0, 0.0))


def ladder_bump(s: np.ndarray) -> np.ndarray:
    """ψ(s) = χ(s) - χ(2s), supported in [1/4, 1]; Σ_{i≤L} ψ(⟨ξ⟩/2^i) telescopes to χ(⟨ξ⟩/2^L) on the lattice"""
    s = np.asarray(s, dtype=float)
    return flat_bump(s) - flat_bump(2.0 * s)


def annular_bump(s: np.ndarray) -> np.ndarray:
    """A smooth bump supported in [1/2, 1]"""
    s = np.asarray(s, dtype=float)
    return flat_bump(np.abs(4.0 * (s - 0.75)))


class CutoffKind(Enum):
    NONE = 'none'
    SMOOTH = 'smooth'


@dataclass(frozen=True)
class FrequencyCutoff:
    """Frequency weights applied inside kernel sums

    NONE is raw truncation at the box, SMOOTH applies χ(⟨ξ⟩/scale) with scale defaulting to the box radius N.
    """

    kind: CutoffKind = CutoffKind.NONE
    scale: Optional[float] = None

    @classmethod
    def from_string(cls, descriptor: str) -> 'FrequencyCutoff':
        """Parse 'none', 'smooth' or 'smooth:<scale>'"""
        kind, _, scale = descriptor.partition(':')
        try:
            cutoff_kind = CutoffKind(kind.strip().lower())
        except ValueError:
            raise ValueError(f'Unknown cutoff "{descriptor}", expected none or smooth[:scale]')
        return cls(cutoff_kind, float(scale) if scale else None)

    def weights(self, box: FreqBox) -> np.ndarray:
        """Weights over the flat lattice"""
        if self.kind is CutoffKind.NONE:
            return np.ones(box.size)
        scale = float(box.N) if self.scale is None else self.scale
        return flat_bump(box.brackets().reshape(-1) / scale)

    def describe(self) -> str:
        if self.kind is CutoffKind.NONE:
            return 'none'
        return 'smooth' if self.scale is None else f'smooth:{self.scale:g}'


@dataclass
class KernelField:
    """Sampled Schwartz kernel k(x_i, y_j) on requested point sets

    :param grid: Grid the kernel is associated with
    :param first_points: (P, n) array of first arguments x
    :param second_points: (R, n) array of second arguments y
    :param values: (P, R) kernel values
    :param cutoff: Descriptor of the frequency weights used
    """

    grid: TorusGrid
    first_points: np.ndarray
    second_points: np.ndarray
    values: np.ndarray
    cutoff: str = 'none'

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError('Kernel field has non-finite entries')

    def differences(self, reference: int) -> np.ndarray:
        """k(x, y_j) - k(x, y_reference) for every column j"""
        return self.values - self.values[:, [reference]]


def _check_compatible(p: Symbol, grid: TorusGrid, box: FreqBox) -> None:
    if p.n != grid.n:
        raise ValueError(f'Dimension mismatch between symbol (n = {p.n}) and grid (n = {grid.n})')
    box.check_grid(grid)


def _row_chunks(total: int, width: int) -> Iterator[slice]:
    step = max(1, CHUNK_ENTRIES // max(1, width))
    for start in range(0, total, step):
        yield slice(start, min(total, start + step))


def _weighted_rows(p: Symbol, points: np.ndarray, box: FreqBox,
                   weights: np.ndarray) -> Iterator[Tuple[slice, np.ndarray]]:
    """Yield blocks Φ(x, ξ) = e^(2πi x·ξ) p(x, ξ) w(ξ) over row chunks of points"""
    lattice = box.lattice()
    for rows in _row_chunks(points.shape[0], lattice.shape[0]):
        block = character_matrix(points[rows], lattice) * p(points[rows], lattice) * weights[None, :]
        yield rows, block


def apply(p: Symbol, f: PeriodicFunction, box: FreqBox) -> PeriodicFunction:
    """Op(p)f(x) = Σ_{ξ∈box} e^(2πi x·ξ) p(x,ξ) (𝓕f)(ξ) on the grid of f

    Multipliers take an FFT path; x-dependent symbols are summed directly over row chunks.

    :param p: Symbol to quantize
    :param f: Input samples
    :param box: Frequency truncation
    :return: Samples of Op(p)f on the same grid
    """

    _check_compatible(p, f.grid, box)
    coefficients = forward_ft(f, box)
    if p.x_independent:
        profile = p.frequency_profile(box.lattice()).reshape(box.shape)
        return inverse_ft(LatticeFunction(box, profile * coefficients.values), f.grid)

    flat_coefficients = coefficients.values.reshape(-1)
    output = np.empty(f.grid.size, dtype=complex)
    for rows, block in _weighted_rows(p, f.grid.points(), box, np.ones(box.size)):
        output[rows] = block @ flat_coefficients
    return PeriodicFunction(f.grid, output)


def adjoint_apply(p: Symbol, g: PeriodicFunction, box: FreqBox) -> PeriodicFunction:
    """T*g with ⟨T*g, f⟩ = ⟨g, Tf⟩ for every grid function f

    This is the conjugate transpose of the grid matrix of apply: T*g = Σ_ξ e^(2πi x·ξ) φ(ξ) with
    φ(ξ) = G^(-n) Σ_i conj(e^(2πi x_i·ξ) p(x_i, ξ)) g(x_i).
    """

    _check_compatible(p, g.grid, box)
    if p.x_independent:
        profile = p.frequency_profile(box.lattice()).reshape(box.shape)
        coefficients = forward_ft(g, box)
        return inverse_ft(LatticeFunction(box, np.conj(profile) * coefficients.values), g.grid)

    flat_g = g.values.reshape(-1)
    phi = np.zeros(box.size, dtype=complex)
    for rows, block in _weighted_rows(p, g.grid.points(), box, np.ones(box.size)):
        phi += np.conj(block).T @ flat_g[rows]
    phi *= g.grid.cell_volume
    return inverse_ft(LatticeFunction(box, phi), g.grid)


def t_star_one(p: Symbol, box: FreqBox, grid: TorusGrid,
               family: Optional[BallFamily] = None) -> Tuple[PeriodicFunction, float]:
    """T*(1) and its BMO norm; constants are BMO-null"""
    image = adjoint_apply(p, as_periodic(grid, 1.0), box)
    value = bmo_norm(image, family)
    LOGGER.info("{0:65}: {val:.3e}".format(f'BMO norm of T*(1) for {p.name}', val=value))
    return image, value


def kernel(p: Symbol, box: FreqBox, grid: TorusGrid, cutoff: FrequencyCutoff = FrequencyCutoff(),
           first_points: Optional[np.ndarray] = None, second_points: Optional[np.ndarray] = None,
           weights: Optional[np.ndarray] = None) -> KernelField:
    """Schwartz kernel k(x,y) = Σ_ξ e^(2πi(x-y)·ξ) p(x,ξ) c(ξ) on every requested (x, y) pair

    :param p: Symbol
    :param box: Frequency truncation
    :param grid: Grid supplying default point sets
    :param cutoff: Frequency weights c(ξ)
    :param first_points: (P, n) x-points, defaults to the grid
    :param second_points: (R, n) y-points, defaults to the grid
    :param weights: Explicit flat lattice weights overriding cutoff
    :return: The sampled kernel
    """

    _check_compatible(p, grid, box)
    first = grid.points() if first_points is None else np.asarray(first_points, dtype=float).reshape(-1, p.n)
    second = grid.points() if second_points is None else np.asarray(second_points, dtype=float).reshape(-1, p.n)
    frequency_weights = cutoff.weights(box) if weights is None else weights

    outgoing = np.conj(character_matrix(second, box.lattice())).T
    values = np.empty((first.shape[0], second.shape[0]), dtype=complex)
    for rows, block in _weighted_rows(p, first, box, frequency_weights):
        values[rows] = block @ outgoing
    return KernelField(grid=grid, first_points=first, second_points=second, values=values,
                       cutoff=cutoff.describe() if weights is None else 'custom')


def kernel_at_pairs(p: Symbol, box: FreqBox, first_points: np.ndarray, second_points: np.ndarray,
                    cutoff: FrequencyCutoff = FrequencyCutoff()) -> np.ndarray:
    """k(x_i, y_i) for matched rows of the two point arrays"""
    first = np.asarray(first_points, dtype=float).reshape(-1, p.n)
    second = np.asarray(second_points, dtype=float).reshape(-1, p.n)
    if first.shape != second.shape:
        raise ValueError(f'Point arrays must match in shape (got {first.shape} and {second.shape})')
    lattice = box.lattice()
    weights = cutoff.weights(box)
    values = np.empty(first.shape[0], dtype=complex)
    for rows in _row_chunks(first.shape[0], lattice.shape[0]):
        phases = character_matrix(first[rows] - second[rows], lattice)
        values[rows] = np.sum(phases * p(first[rows], lattice) * weights[None, :], axis=1)
    return values


def ladder_scales(N: int) -> Tuple[float, ...]:
    """Dyadic scales t = 2^i, i = 0..ceil(log2 N)"""
    top = max(0, math.ceil(math.log2(max(N, 1))))
    return tuple(float(2 ** i) for i in range(top + 1))


def lp_kernel_piece(p: Symbol, t: float, box: FreqBox, grid: TorusGrid, bump: str = 'ladder',
                    first_points: Optional[np.ndarray] = None,
                    second_points: Optional[np.ndarray] = None) -> KernelField:
    """Frequency-localized kernel piece Σ_ξ e^(2πi(x-y)·ξ) p(x,ξ) φ(⟨ξ⟩/t)

    The 'ladder' bump is ψ(s) = χ(s) - χ(2s): summing its pieces over ladder_scales(N) reproduces kernel(p) with the
    smooth cutoff χ(⟨ξ⟩/2^L), hence the raw kernel for symbols supported where ⟨ξ⟩ ≤ 2^(L-1). The 'annular' bump
    is supported in [1/2, 1], so its piece vanishes unless some lattice ⟨ξ⟩ lies in [t/2, t].

    :param p: Symbol
    :param t: Scale, at least 1
    :param box: Frequency truncation
    :param grid: Grid supplying default point sets
    :param bump: 'ladder' or 'annular'
    :return: The kernel piece
    """

    if t < 1:
        raise ValueError(f'Littlewood-Paley scale must satisfy t >= 1 (got t = {t}); the band ⟨ξ⟩ ≤ t is empty')
    bumps = {'ladder': ladder_bump, 'annular': annular_bump}
    if bump not in bumps:
        raise ValueError(f'Unknown bump "{bump}", expected one of {sorted(bumps)}')
    weights = bumps[bump](box.brackets().reshape(-1) / t)
    piece = kernel(p, box, grid, first_points=first_points, second_points=second_points, weights=weights)
    piece.cutoff = f'{bump}:t={t:g}'
    return piece
