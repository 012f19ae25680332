import math

import numpy as np

from dataclasses import dataclass, field
from typing import List

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, ball_volume

LOGGER = PDOLogger(__name__).get_logger()


def n_sigma(sigma: float, n: int) -> int:
    """The integer N_σ with √n/(2σ) < 2^(N_σ) ≤ √n/σ, clamped at zero

    :param sigma: Scale, must be positive
    :param n: Dimension
    :return: N_σ
    """

    if sigma <= 0:
        raise ValueError(f'Scale sigma must be positive (got sigma = {sigma})')
    upper = math.sqrt(n) / sigma
    exponent = math.floor(math.log2(upper))
    # log2 can land one off on exact powers of two
    while 2.0 ** exponent > upper:
        exponent -= 1
    while 2.0 ** (exponent + 1) <= upper:
        exponent += 1
    return max(exponent, 0)


@dataclass
class AnnulusDecomposition:
    """Core ball and dyadic shells around z at scale σ

    Shell j ≥ 1 is A_j(z,σ) = {2^j σ ≤ dist(x,z) < 2^(j+1) σ} and shell 0 is the core B(z, 2σ), so the shells
    partition the grid exactly. Shells beyond the torus diameter are empty.
    """

    grid: TorusGrid
    z: np.ndarray
    sigma: float
    n_sigma: int = field(init=False)
    distances: np.ndarray = field(init=False, repr=False)
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float).reshape(self.grid.n)
        self.n_sigma = n_sigma(self.sigma, self.grid.n)
        self.distances = self.grid.distance_to(self.z)
        self.labels = np.zeros(self.grid.shape, dtype=int)
        for j in range(1, self.n_sigma + 1):
            self.labels[self.distances >= 2.0 ** j * self.sigma] = j

    def mask(self, j: int) -> np.ndarray:
        return self.labels == j

    def ball_mask(self, j: int) -> np.ndarray:
        """Grid points of B(z, 2^(j+1) σ) = shells 0..j"""
        return self.labels <= j

    def cell_count(self, j: int) -> int:
        return int(np.count_nonzero(self.labels == j))

    def measure(self, j: int) -> float:
        """Grid measure of shell j"""
        return self.cell_count(j) * self.grid.cell_volume

    def analytic_measure(self, j: int) -> float:
        inner = 0.0 if j == 0 else ball_volume(2.0 ** j * self.sigma, self.grid.n)
        return ball_volume(2.0 ** (j + 1) * self.sigma, self.grid.n) - inner

    def outer_radius(self, j: int) -> float:
        return 2.0 ** (j + 1) * self.sigma

    def shells(self, min_cells: int = 1, include_core: bool = True) -> List[int]:
        """Indices of shells holding at least min_cells grid points"""
        start = 0 if include_core else 1
        return [j for j in range(start, self.n_sigma + 1) if self.cell_count(j) >= min_cells]
