"""Maximal operators and BMO over a documented family of balls

The family holds every ball centred on a grid point with radius 2^(-k), k = 1..log2(G), plus the whole torus. A
ball B(c, r) contains x iff dist(x, c) < r. Each quantity is a sup over the balls of the family containing x,
evaluated by gathering ball samples through index offsets so the sup is exact over the family.
"""

import math

import numpy as np

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional, Tuple

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, PeriodicFunction

LOGGER = PDOLogger(__name__).get_logger()

CHUNK_ENTRIES = 2 ** 21
WHOLE_TORUS = float('inf')


@dataclass(frozen=True)
class BallFamily:
    """Grid-centred balls with dyadic radii on a TorusGrid"""

    grid: TorusGrid
    include_torus: bool = True

    @property
    def radii(self) -> Tuple[float, ...]:
        levels = max(1, int(math.log2(self.grid.G)))
        radii = tuple(2.0 ** (-k) for k in range(1, levels + 1))
        return radii + ((WHOLE_TORUS,) if self.include_torus else ())

    @lru_cache(maxsize=None)
    def offsets(self, radius: float) -> np.ndarray:
        """Integer index offsets o with periodic norm |o|/G < radius, as a (K, n) array"""
        side = np.arange(self.grid.G)
        wrapped = (side + self.grid.G // 2) % self.grid.G - self.grid.G // 2
        mesh = np.meshgrid(*([wrapped] * self.grid.n), indexing='ij')
        candidates = np.stack([axis.reshape(-1) for axis in mesh], axis=-1)
        if np.isinf(radius):
            return candidates
        norms = np.sqrt(np.sum((candidates / self.grid.G) ** 2, axis=1))
        return candidates[norms < radius]

    def gather(self, values: np.ndarray, radius: float) -> Iterator[Tuple[slice, np.ndarray]]:
        """Yield (centres, samples) blocks; samples[i, k] is the k-th point of the ball around centre i"""
        flat_values = np.asarray(values).reshape(-1)
        centres = np.arange(self.grid.size)
        unravelled = np.stack(np.unravel_index(centres, self.grid.shape), axis=-1)
        offsets = self.offsets(radius)
        step = max(1, CHUNK_ENTRIES // max(1, offsets.shape[0]))
        for start in range(0, self.grid.size, step):
            rows = slice(start, min(self.grid.size, start + step))
            points = (unravelled[rows][:, None, :] + offsets[None, :, :]) % self.grid.G
            indices = np.ravel_multi_index(tuple(np.moveaxis(points, -1, 0)), self.grid.shape)
            yield rows, flat_values[indices]

    def ball_statistic(self, values: np.ndarray, radius: float,
                       statistic: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """statistic(samples) for the ball of the given radius around every grid point, shaped like the grid"""
        if np.isinf(radius):
            whole = statistic(np.asarray(values).reshape(1, -1))
            return np.full(self.grid.shape, float(whole[0]))
        result = np.empty(self.grid.size, dtype=float)
        for rows, samples in self.gather(values, radius):
            result[rows] = statistic(samples)
        return result.reshape(self.grid.shape)

    def sup_over_containing(self, per_centre: np.ndarray, radius: float) -> np.ndarray:
        """x ↦ max of per_centre over centres c with x ∈ B(c, radius)"""
        if np.isinf(radius):
            return np.full(self.grid.shape, np.max(per_centre))
        return self.ball_statistic(per_centre, radius, lambda samples: np.max(samples, axis=1))

    def maximal(self, values: np.ndarray, statistic: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """x ↦ sup over balls of the family containing x of statistic over that ball"""
        result = np.zeros(self.grid.shape, dtype=float)
        for radius in self.radii:
            per_centre = self.ball_statistic(values, radius, statistic)
            result = np.maximum(result, self.sup_over_containing(per_centre, radius))
        return result


def _family(f: PeriodicFunction, family: Optional[BallFamily]) -> BallFamily:
    if family is None:
        return BallFamily(f.grid)
    if family.grid != f.grid:
        raise ValueError(f'Ball family grid {family.grid} does not match function grid {f.grid}')
    return family


def _componentwise_median(samples: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(samples) and np.any(samples.imag != 0):
        return np.median(samples.real, axis=1) + 1j * np.median(samples.imag, axis=1)
    return np.median(samples.real, axis=1)


def _mean_oscillation(samples: np.ndarray) -> np.ndarray:
    return np.mean(np.abs(samples - np.mean(samples, axis=1, keepdims=True)), axis=1)


def _best_oscillation(samples: np.ndarray) -> np.ndarray:
    median = _componentwise_median(samples)
    median_oscillation = np.mean(np.abs(samples - median[:, None]), axis=1)
    return np.minimum(median_oscillation, _mean_oscillation(samples))


def maximal_p(f: PeriodicFunction, p: float, family: Optional[BallFamily] = None) -> PeriodicFunction:
    """Hardy-Littlewood p-maximal function M_p f(x) = sup_{B∋x} (|B|^(-1) ∫_B |f|^p)^(1/p)

    :param f: Input samples
    :param p: Exponent in [1, ∞]; p = ∞ takes the sup of |f| over each ball
    :param family: Ball family, defaults to the dyadic family on f's grid
    :return: M_p f on the grid (real valued)
    """

    if not p >= 1:
        raise ValueError(f'Maximal exponent must satisfy p >= 1 (got p = {p})')
    balls = _family(f, family)
    magnitude = np.abs(f.values)
    if np.isinf(p):
        return PeriodicFunction(f.grid, balls.maximal(magnitude, lambda samples: np.max(samples, axis=1)))
    powered = balls.maximal(magnitude ** p, lambda samples: np.mean(samples, axis=1))
    return PeriodicFunction(f.grid, powered ** (1.0 / p))


@dataclass
class SharpMaximal:
    """Sharp maximal function with both centrings

    :param values: f^# with the inner inf over c realised by the better of median and mean centring
    :param mean_centered: the same sup with c = f_B
    """

    values: PeriodicFunction
    mean_centered: PeriodicFunction


def sharp_maximal(f: PeriodicFunction, family: Optional[BallFamily] = None) -> SharpMaximal:
    """f^#(x) = sup_{B∋x} inf_c |B|^(-1) ∫_B |f - c|

    The median is the exact minimiser for real data; complex data use the componentwise median and keep the mean
    when that is smaller.
    """

    balls = _family(f, family)
    best = balls.maximal(f.values, _best_oscillation)
    mean_centred = balls.maximal(f.values, _mean_oscillation)
    return SharpMaximal(PeriodicFunction(f.grid, best), PeriodicFunction(f.grid, mean_centred))


def bmo_norm(f: PeriodicFunction, family: Optional[BallFamily] = None) -> float:
    """sup over the ball family of |B|^(-1) ∫_B |f - f_B|"""
    balls = _family(f, family)
    value = 0.0
    for radius in balls.radii:
        value = max(value, float(np.max(balls.ball_statistic(f.values, radius, _mean_oscillation))))
    return value
