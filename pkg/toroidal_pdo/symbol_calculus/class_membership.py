import numpy as np
import pandas as pd

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, FreqBox, bracket
from toroidal_pdo.symbol_calculus.symbol import Symbol, difference_op, x_derivative, multi_indices

LOGGER = PDOLogger(__name__).get_logger()

IndexPair = Tuple[Tuple[int, ...], Tuple[int, ...]]

# Constants at or below this value are treated as exact zeros when judging N-stability
ZERO_FLOOR = 1e-9


@dataclass
class SymbolClassReport:
    """Sampled Hörmander constants C_{αβ} for a claimed class S^m_{ρ,δ}

    :param constants: C_{αβ} measured on the box of radius N
    :param doubled_constants: C_{αβ} measured on the box of radius 2N
    """

    symbol_name: str
    m: float
    rho: float
    delta: float
    N: int
    cap: float
    stability: float
    constants: Dict[IndexPair, float] = field(default_factory=dict)
    doubled_constants: Dict[IndexPair, float] = field(default_factory=dict)

    def ratio(self, pair: IndexPair) -> float:
        """C_{αβ}(2N)/C_{αβ}(N), with 1 when both are numerically zero"""
        low, high = self.constants[pair], self.doubled_constants[pair]
        if low <= ZERO_FLOOR:
            return 1.0 if high <= ZERO_FLOOR else float('inf')
        return high / low

    def failures(self) -> List[str]:
        failed = []
        for pair, constant in self.constants.items():
            if not np.isfinite(constant) or constant > self.cap:
                failed.append(f'C{pair} = {constant:.4g} exceeds cap {self.cap:g}')
            elif self.ratio(pair) > self.stability:
                failed.append(f'C{pair} unstable under N doubling (ratio {self.ratio(pair):.4g})')
        return failed

    @property
    def passed(self) -> bool:
        return len(self.failures()) == 0

    def to_frame(self) -> pd.DataFrame:
        records = [{'alpha': str(alpha), 'beta': str(beta), 'N': self.N,
                    'constant': self.constants[(alpha, beta)],
                    'doubled_constant': self.doubled_constants[(alpha, beta)],
                    'ratio': self.ratio((alpha, beta))}
                   for alpha, beta in self.constants]
        return pd.DataFrame.from_records(records, columns=['alpha', 'beta', 'N', 'constant', 'doubled_constant',
                                                           'ratio'])


def _sampled_constant(p: Symbol, alpha: Tuple[int, ...], beta: Tuple[int, ...], weight_order: float,
                      grid: TorusGrid, frequencies: np.ndarray) -> float:
    derivative = x_derivative(difference_op(p, alpha), beta, grid, frequencies)
    weights = bracket(frequencies) ** weight_order
    return float(np.max(np.abs(derivative) * weights))


def class_membership(p: Symbol, m: float, rho: float, delta: float, alpha_max: int, beta_max: int,
                     box: FreqBox, grid: TorusGrid, cap: float = 1e6, stability: float = 1.1,
                     real_offset: Optional[float] = None) -> SymbolClassReport:
    """Estimate the constants of p in S^m_{ρ,δ} by an exhaustive max over box × grid samples

    Every pair (α, β) with |α| ≤ alpha_max and |β| ≤ beta_max is measured on the box of radius N and again on the
    box of radius 2N. The claim passes when every constant is below the cap and stable under the doubling. This is a
    sampled estimate, never a proof; instability is reported rather than raised.

    :param p: Symbol to test
    :param m: Claimed order
    :param rho: Claimed ρ
    :param delta: Claimed δ
    :param alpha_max: Largest |α| for ξ-differences
    :param beta_max: Largest |β| for x-derivatives
    :param box: Frequency box providing N
    :param grid: Grid resolving p in x
    :param cap: Largest admissible constant
    :param stability: Largest admissible ratio C(2N)/C(N)
    :param real_offset: When given, frequencies are shifted by this fractional offset to sample the ℝⁿ extension
    :return: A SymbolClassReport
    """

    if alpha_max < 0 or beta_max < 0:
        raise ValueError(f'alpha_max and beta_max must be non-negative (got {alpha_max}, {beta_max})')
    if grid.n != p.n or box.n != p.n:
        raise ValueError(f'Dimension mismatch: symbol n = {p.n}, grid n = {grid.n}, box n = {box.n}')

    report = SymbolClassReport(symbol_name=p.name, m=m, rho=rho, delta=delta, N=box.N, cap=cap,
                               stability=stability)
    offset = 0.0 if real_offset is None else real_offset
    samples = {'constants': box.lattice() + offset,
               'doubled_constants': FreqBox(box.n, 2 * box.N).lattice() + offset}

    for alpha in multi_indices(p.n, alpha_max):
        for beta in multi_indices(p.n, beta_max):
            weight_order = -m + rho * sum(alpha) - delta * sum(beta)
            for attribute, frequencies in samples.items():
                getattr(report, attribute)[(alpha, beta)] = _sampled_constant(p, alpha, beta, weight_order, grid,
                                                                              frequencies)

    failures = report.failures()
    if failures:
        for failure in failures:
            LOGGER.warning(f'{p.name} in S^{m:g}_{{{rho:g},{delta:g}}}: {failure}')
    else:
        LOGGER.info("{0:65}: {val}".format(f'{p.name} in S^{m:g}_{{{rho:g},{delta:g}}} at N = {box.N}',
                                           val='pass'))
    return report
