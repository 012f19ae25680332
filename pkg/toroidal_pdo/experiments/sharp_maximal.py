import math

import numpy as np

from typing import Any, Dict

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import FreqBox, PeriodicFunction, TorusGrid
from toroidal_pdo.symbol_calculus.symbol import Symbol
from toroidal_pdo.quantizer.quantizer import FrequencyCutoff, apply
from toroidal_pdo.quantizer.kernel_estimates import d_condition_check
from toroidal_pdo.hardy_spaces.maximal import BallFamily, bmo_norm, maximal_p, sharp_maximal
from toroidal_pdo.job_management.thread_utility import ThreadUtility
from toroidal_pdo.experiments.experiment_config import ExperimentConfig
from toroidal_pdo.experiments.experiment_loader import ExperimentLoader
from toroidal_pdo.experiments.sweep_result import SweepResult, start_result

LOGGER = PDOLogger(__name__).get_logger()


class BandlimitedFunction:
    """A real trigonometric polynomial Σ a_k cos(2π ξ_k·x + φ_k) that can be sampled on any grid

    Index 0 is the constant function 1. Other indices draw f_modes random frequencies with |ξ|_∞ ≤ f_modes and
    are scaled so that the sup over the reference grid equals one.
    """

    def __init__(self, n: int, f_modes: int, seed: np.random.SeedSequence, reference: TorusGrid,
                 constant: bool = False):

        self.constant = constant
        rng = np.random.default_rng(seed)
        self.frequencies = rng.integers(-f_modes, f_modes + 1, size=(f_modes, n))
        self.amplitudes = rng.standard_normal(f_modes)
        self.phases = rng.uniform(0.0, 2.0 * np.pi, f_modes)
        self.scale = 1.0
        if not constant:
            self.scale = 1.0 / np.max(np.abs(self._raw(reference)))

    def _raw(self, grid: TorusGrid) -> np.ndarray:
        points = grid.points()
        phases = 2.0 * np.pi * points @ self.frequencies.T + self.phases[None, :]
        return (np.cos(phases) @ self.amplitudes).reshape(grid.shape)

    def sample(self, grid: TorusGrid) -> PeriodicFunction:
        if self.constant:
            return PeriodicFunction(grid, np.ones(grid.shape))
        return PeriodicFunction(grid, self.scale * self._raw(grid))


def maximal_exponent(maximal_power: float, r: float) -> float:
    """s = max{p, r'} with r' = r/(r-1), infinite at r = 1"""
    dual = math.inf if r <= 1.0 else r / (r - 1.0)
    return max(maximal_power, dual)


def compare_function(symbol: Symbol, bandlimited: BandlimitedFunction, box: FreqBox, grid: TorusGrid,
                     fine_grid: TorusGrid, s: float, epsilon_floor: float) -> Dict[str, Any]:
    """(Tf)^# against M_s f and 2M_1(Tf) on the grid, and bmo(Tf)/‖f‖_∞ on the grid and the refined grid"""

    family = BallFamily(grid)
    f = bandlimited.sample(grid)
    image = apply(symbol, f, box)
    sharp = np.real(sharp_maximal(image, family).values.values)
    controlling = np.real(maximal_p(f, s, family).values)
    first_maximal = np.real(maximal_p(image, 1.0, family).values)

    resolved = controlling > epsilon_floor
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = sharp[resolved] / controlling[resolved]
    sup_norm = f.lp_norm(math.inf)
    bmo = bmo_norm(image, family)
    fine_bmo = bmo_norm(apply(symbol, bandlimited.sample(fine_grid), box), BallFamily(fine_grid))

    return {'sharp_over_maximal': float(np.max(ratios)) if ratios.size else 0.0,
            'ratio_nonfinite': int(np.count_nonzero(~np.isfinite(ratios))),
            'sharp_exceeds_twice_m1': float(max(0.0, np.max(sharp - 2.0 * first_maximal))),
            'bmo_ratio': bmo / sup_norm,
            'bmo_resolution_drift': abs(fine_bmo - bmo) / bmo if bmo > epsilon_floor else math.nan}


def run_sharp_maximal_check(cfg: ExperimentConfig) -> SweepResult:
    """Pointwise (Tf)^# / M_s f for bounded f, the L^∞ → BMO constant, and the D_{r,α} audit it relies on"""

    options = cfg.sharp_max
    d_options = cfg.d_condition
    r, alpha = float(d_options['r']), float(d_options['alpha'])
    omega = d_options.get('omega')
    s = maximal_exponent(float(options['maximal_p']), r)
    epsilon_floor = float(options['epsilon_floor'])
    f_modes = int(options['f_modes'])
    if f_modes > cfg.N:
        raise ValueError(f'f_modes = {f_modes} exceeds the truncation radius N = {cfg.N}')

    symbol = cfg.make_symbol()
    grid, fine_grid, box = cfg.grid(), cfg.grid(2 * cfg.G), cfg.box()
    cutoff = FrequencyCutoff.from_string(cfg.kernel.get('cutoff', 'smooth'))
    n_probes = int(cfg.kernel.get('n_probes', 8 * cfg.n))
    result = start_result(cfg, m=symbol.claimed_order, rho=symbol.claimed_rho, delta=symbol.claimed_delta)

    coarse = d_condition_check(symbol, r, alpha, cfg.sigmas, box, grid, cutoff, n_probes=n_probes, seed=cfg.seed,
                               omega=None if omega is None else float(omega),
                               holder_samples=int(d_options.get('holder_samples', 0)),
                               cap=cfg.calibration('d_sum_cap'))
    fine = d_condition_check(symbol, r, alpha, cfg.sigmas, box, fine_grid, cutoff, n_probes=n_probes,
                             seed=cfg.seed, cap=cfg.calibration('d_sum_cap'))
    result.add_row('d_condition_sum', coarse.d_sum, cfg.tolerance('d_sum_cap'))
    drift = abs(fine.d_sum - coarse.d_sum) / coarse.d_sum if coarse.d_sum > 0 else 0.0
    result.add_row('d_sum_resolution_drift', drift, cfg.tolerance('resolution_stability'))
    if coarse.holder_constant is not None:
        result.add_row('holder_constant', coarse.holder_constant)
    result.add_row('maximal_exponent', s)
    result.extras['d_condition'] = coarse.to_frame().to_dict('records')

    thread_utility = ThreadUtility(threads=cfg.threads, error_message='A sharp maximal comparison failed',
                                   incrementor=10)
    for index in range(int(options['n_functions']) + 1):
        bandlimited = BandlimitedFunction(cfg.n, f_modes, cfg.cell_seed(index), grid, constant=index == 0)
        thread_utility.launch_job(index, compare_function, symbol=symbol, bandlimited=bandlimited, box=box, grid=grid,
                                  fine_grid=fine_grid, s=s, epsilon_floor=epsilon_floor)
    comparisons = thread_utility.collect_results()

    for index, comparison in comparisons.items():
        label = f'[f={index}]'
        result.add_row(f'sharp_over_maximal{label}', comparison['sharp_over_maximal'])
        result.add_row(f'ratio_nonfinite{label}', comparison['ratio_nonfinite'],
                       0.0 if cfg.assert_mode else None)
        result.add_row(f'sharp_exceeds_twice_m1{label}', comparison['sharp_exceeds_twice_m1'],
                       cfg.tolerance('ordering'))
        result.add_row(f'bmo_ratio{label}', comparison['bmo_ratio'])
        drift = comparison['bmo_resolution_drift']
        result.add_row(f'bmo_resolution_drift{label}', drift,
                       cfg.tolerance('resolution_stability') if math.isfinite(drift) else None)

    return result


class LoadModule(ExperimentLoader):

    def _load_module_options(self) -> None:
        self._parser.add_argument('--r',
                                  help="Exponent r of the D_{r,alpha} condition.",
                                  type=float, dest='d_condition.r', required=False, default=None)
        self._parser.add_argument('--alpha',
                                  help="Scaling exponent alpha of the D_{r,alpha} condition.",
                                  type=float, dest='d_condition.alpha', required=False, default=None)
        self._parser.add_argument('--n-functions',
                                  help="Random bounded test functions besides the constant.",
                                  type=int, dest='sharp_max.n_functions', required=False, default=None)

    def start_module(self) -> SweepResult:
        return run_sharp_maximal_check(self.config)
