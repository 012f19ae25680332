import math

import numpy as np
import pandas as pd

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, FreqBox, periodic_distance
from toroidal_pdo.symbol_calculus.symbol import Symbol
from toroidal_pdo.quantizer.quantizer import FrequencyCutoff, CutoffKind, kernel, kernel_at_pairs
from toroidal_pdo.hardy_spaces.annuli import AnnulusDecomposition
from toroidal_pdo.linear_model.slope_fit import SlopeFitResult, fit_log_slope

LOGGER = PDOLogger(__name__).get_logger()

SIDES = ('right', 'left')
SMOOTH_CUTOFF = FrequencyCutoff(CutoffKind.SMOOTH)


def probe_set(z: np.ndarray, sigma: float, n_probes: int, fraction: float = 0.9, seed: int = 0) -> np.ndarray:
    """Seeded radial probes y = z + fraction·σ·u for random unit directions u, with z itself as the last row"""
    z = np.asarray(z, dtype=float).reshape(-1)
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((n_probes, z.size))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    probes = np.mod(z[None, :] + fraction * sigma * directions, 1.0)
    return np.vstack([probes, z[None, :]])


def kernel_differences(p: Symbol, points: np.ndarray, box: FreqBox, grid: TorusGrid, cutoff: FrequencyCutoff,
                       side: str) -> np.ndarray:
    """Kernel differences against the last row of points, one row per remaining point over the grid

    side 'right' gives k(x, y) - k(x, z) and side 'left' gives k(y, x) - k(z, x), for x running over the grid.
    """

    if side == 'right':
        values = kernel(p, box, grid, cutoff, second_points=points).values.T
    elif side == 'left':
        values = kernel(p, box, grid, cutoff, first_points=points).values
    else:
        raise ValueError(f'Unknown kernel side "{side}", expected one of {SIDES}')
    return (values[:-1] - values[-1:]).reshape(-1, *grid.shape)


def annulus_norms(differences: np.ndarray, annuli: AnnulusDecomposition, js: Sequence[int],
                  r: float = 1.0) -> np.ndarray:
    """L^r norm over each annulus A_j of every difference row, shape (rows, len(js))"""
    grid = annuli.grid
    rows = differences.reshape(differences.shape[0], -1)
    norms = np.zeros((rows.shape[0], len(js)))
    for column, j in enumerate(js):
        mask = annuli.mask(j).reshape(-1)
        if not np.any(mask):
            continue
        magnitude = np.abs(rows[:, mask])
        if np.isinf(r):
            norms[:, column] = np.max(magnitude, axis=1)
        else:
            norms[:, column] = (np.sum(magnitude ** r, axis=1) * grid.cell_volume) ** (1.0 / r)
    return norms


@dataclass
class AnnulusEstimate:
    """Per-annulus integrals I_j = max over probes y of ∫_{A_j(z, scale)} |kernel difference| dx

    :param regime: 'small' uses scale σ^γ, 'large' (σ ≥ ε) uses scale σ
    """

    z: np.ndarray
    sigma: float
    gamma: float
    side: str
    regime: str
    scale: float
    n_sigma: int
    js: List[int]
    integrals: np.ndarray
    cell_counts: List[int]

    def usable(self, min_cells: int = 32) -> np.ndarray:
        """Annuli j ≤ N-1 with at least min_cells grid cells"""
        return np.array([j <= self.n_sigma - 1 and cells >= min_cells
                         for j, cells in zip(self.js, self.cell_counts)], dtype=bool)

    def local(self) -> np.ndarray:
        """Annuli whose outer radius stays within √n/4, away from the antipodal region"""
        reach = math.sqrt(len(self.z)) / 4.0
        return np.array([2.0 ** (j + 1) * self.scale <= reach + 1e-12 for j in self.js], dtype=bool)

    def fit(self, min_cells: int = 32) -> SlopeFitResult:
        """Least squares slope of log2 I_j against j"""
        keep = self.usable(min_cells)
        return fit_log_slope(f'{self.side}:gamma={self.gamma:g}:sigma={self.sigma:g}',
                             np.asarray(self.js)[keep], self.integrals[keep])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'j': self.js, 'sigma': self.sigma, 'gamma': self.gamma, 'side': self.side,
                             'I_j': self.integrals, 'cells': self.cell_counts})


def annulus_kernel_estimate(p: Symbol, z: np.ndarray, sigma: float, gamma: float, box: FreqBox, grid: TorusGrid,
                            side: str = 'right', epsilon: float = 0.25,
                            cutoff: FrequencyCutoff = SMOOTH_CUTOFF, n_probes: Optional[int] = None,
                            probe_fraction: float = 0.9, seed: int = 0,
                            probes: Optional[np.ndarray] = None) -> AnnulusEstimate:
    """Sampled sup over |y - z| < σ of the annulus integrals of kernel differences

    For σ < ε the annuli are A_j(z, σ^γ), j = 1..N_{σ^γ}; for σ ≥ ε (the large scale regime) they are A_j(z, σ)
    and γ plays no part. The sup over y runs over probe_set (8·n probes by default) unless explicit probes are
    given; an explicit probe array must end with z.

    :param p: Symbol
    :param z: Centre
    :param sigma: Probe radius σ
    :param gamma: Annulus exponent γ ∈ (0,1]
    :param box: Frequency truncation
    :param grid: Quadrature grid
    :param side: 'right' for k(x,y)-k(x,z), 'left' for k(y,x)-k(z,x)
    :param epsilon: Floor on σ for the large scale regime
    :param cutoff: Frequency weights in the kernel sum
    :return: An AnnulusEstimate
    """

    if not 0 < gamma <= 1:
        raise ValueError(f'gamma must lie in (0,1] (got gamma = {gamma})')
    if sigma <= 0:
        raise ValueError(f'sigma must be positive (got sigma = {sigma})')

    regime = 'large' if sigma >= epsilon else 'small'
    scale = sigma if regime == 'large' else sigma ** gamma
    if scale >= math.sqrt(grid.n):
        raise ValueError(f'Annulus scale {scale:g} >= sqrt(n) = {math.sqrt(grid.n):g}, no annuli exist')

    z = np.asarray(z, dtype=float).reshape(grid.n)
    if probes is None:
        probes = probe_set(z, sigma, 8 * grid.n if n_probes is None else n_probes, probe_fraction, seed)
    annuli = AnnulusDecomposition(grid, z, scale)
    js = list(range(1, annuli.n_sigma + 1))
    differences = kernel_differences(p, probes, box, grid, cutoff, side)
    integrals = np.max(annulus_norms(differences, annuli, js, r=1.0), axis=0) if differences.shape[0] else \
        np.zeros(len(js))

    return AnnulusEstimate(z=z, sigma=sigma, gamma=gamma, side=side, regime=regime, scale=scale,
                           n_sigma=annuli.n_sigma, js=js, integrals=integrals,
                           cell_counts=[annuli.cell_count(j) for j in js])


@dataclass
class DConditionReport:
    """Constants d_j of the D_{r,α} condition, maximised over σ, centres, probes and both kernel sides

    :param per_sigma: d_j(σ) for each σ, NaN where the annulus does not exist
    :param holder_constant: Sampled D_α constant when requested
    """

    r: float
    alpha: float
    omega: Optional[float]
    sigmas: List[float]
    d: np.ndarray
    per_sigma: Dict[float, np.ndarray] = field(default_factory=dict)
    holder_constant: Optional[float] = None
    cap: float = 1e3

    @property
    def d_sum(self) -> float:
        return float(np.sum(self.d))

    @property
    def passed(self) -> bool:
        return bool(np.all(self.d >= 0) and np.isfinite(self.d_sum) and self.d_sum <= self.cap)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for sigma, values in self.per_sigma.items():
            for j, value in enumerate(values, start=1):
                records.append({'j': j, 'sigma': sigma, 'gamma': self.alpha, 'd_j': value})
        return pd.DataFrame.from_records(records, columns=['j', 'sigma', 'gamma', 'd_j'])


def _holder_constant(p: Symbol, alpha: float, omega: float, box: FreqBox, cutoff: FrequencyCutoff, n: int,
                     samples: int, seed: int) -> float:
    """max (|k(x,y)-k(x,z)| + |k(y,x)-k(z,x)|)·|x-z|^(n+ω/α)/|y-z|^ω over triples with 2|y-z|^α ≤ |x-z|"""
    rng = np.random.default_rng(seed)
    largest_offset = min(0.125, (0.25 / 2.0) ** (1.0 / alpha))
    z = rng.random((samples, n))
    y_offset = rng.uniform(0.05 * largest_offset, largest_offset, samples)
    y_dirs = rng.standard_normal((samples, n))
    y = np.mod(z + (y_offset / np.linalg.norm(y_dirs, axis=1))[:, None] * y_dirs, 1.0)
    separation = 2.0 * periodic_distance(y, z) ** alpha
    x_offset = rng.uniform(separation, 0.5)
    x_dirs = rng.standard_normal((samples, n))
    x = np.mod(z + (x_offset / np.linalg.norm(x_dirs, axis=1))[:, None] * x_dirs, 1.0)

    right = np.abs(kernel_at_pairs(p, box, x, y, cutoff) - kernel_at_pairs(p, box, x, z, cutoff))
    left = np.abs(kernel_at_pairs(p, box, y, x, cutoff) - kernel_at_pairs(p, box, z, x, cutoff))
    dist_xz = periodic_distance(x, z)
    dist_yz = periodic_distance(y, z)
    valid = 2.0 * dist_yz ** alpha <= dist_xz
    if not np.any(valid):
        return 0.0
    ratios = (right + left) * dist_xz ** (n + omega / alpha) / dist_yz ** omega
    return float(np.max(ratios[valid]))


def d_condition_check(p: Symbol, r: float, alpha: float, sigma_list: Sequence[float], box: FreqBox,
                      grid: TorusGrid, cutoff: FrequencyCutoff = SMOOTH_CUTOFF,
                      centres: Optional[np.ndarray] = None, n_probes: Optional[int] = None,
                      probe_fraction: float = 0.9, seed: int = 0, omega: Optional[float] = None,
                      holder_samples: int = 0, cap: float = 1e3) -> DConditionReport:
    """Audit the D_{r,α} condition on k and on its transpose k̃(x,y) = k(y,x)

    For each σ the annuli are A_j(z, σ^α) and d_j(σ) = max over probes y of
    ‖k(·,y) - k(·,z)‖_{L^r(A_j)}·|A_j|^(1/r'). The reported d_j is the max over σ, centres and both sides.

    :param p: Symbol
    :param r: Exponent in [1, ∞]
    :param alpha: Scaling exponent in (0,1]
    :param sigma_list: Scales σ
    :param box: Frequency truncation
    :param grid: Quadrature grid
    :param centres: Centres z as a (C, n) array, defaults to the origin
    :param omega: Regularity exponent for the sampled D_α constant
    :param holder_samples: Number of sampled triples for the D_α constant, 0 to skip it
    :param cap: Largest admissible Σ d_j
    :return: A DConditionReport
    """

    if len(sigma_list) == 0:
        raise ValueError('d_condition_check needs a non-empty sigma list')
    if not r >= 1:
        raise ValueError(f'r must lie in [1, inf] (got r = {r})')
    if not 0 < alpha <= 1:
        raise ValueError(f'alpha must lie in (0,1] (got alpha = {alpha})')

    dual_exponent = 1.0 - 1.0 / r
    centres = np.zeros((1, grid.n)) if centres is None else np.asarray(centres, dtype=float).reshape(-1, grid.n)
    per_sigma = {}
    for sigma in sigma_list:
        scale = sigma ** alpha
        values = None
        for index, z in enumerate(centres):
            annuli = AnnulusDecomposition(grid, z, scale)
            js = list(range(1, annuli.n_sigma + 1))
            measures = np.array([annuli.measure(j) for j in js])
            weights = np.where(measures > 0, measures ** dual_exponent, 0.0)
            probes = probe_set(z, sigma, 8 * grid.n if n_probes is None else n_probes, probe_fraction,
                               seed + index)
            for side in SIDES:
                norms = annulus_norms(kernel_differences(p, probes, box, grid, cutoff, side), annuli, js, r)
                candidate = np.max(norms, axis=0) * weights
                values = candidate if values is None else np.maximum(values, candidate)
        per_sigma[float(sigma)] = values

    length = max(len(values) for values in per_sigma.values())
    padded = {sigma: np.pad(values, (0, length - len(values)), constant_values=np.nan)
              for sigma, values in per_sigma.items()}
    d = np.nanmax(np.vstack(list(padded.values())), axis=0) if length else np.zeros(0)

    holder = None
    if omega is not None and holder_samples > 0:
        holder = _holder_constant(p, alpha, omega, box, cutoff, grid.n, holder_samples, seed)

    report = DConditionReport(r=r, alpha=alpha, omega=omega, sigmas=[float(s) for s in sigma_list],
                              d=np.nan_to_num(d), per_sigma=padded, holder_constant=holder, cap=cap)
    LOGGER.info("{0:65}: {val:.4g}".format(f'D_{{{r:g},{alpha:g}}} sum of d_j for {p.name}', val=report.d_sum))
    return report
