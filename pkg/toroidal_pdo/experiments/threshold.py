import math

import numpy as np

from typing import Dict, List, Tuple

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import FreqBox, TorusGrid
from toroidal_pdo.symbol_calculus.symbol import Symbol
from toroidal_pdo.quantizer.quantizer import apply
from toroidal_pdo.hardy_spaces.atoms import Atom, make_atom
from toroidal_pdo.hardy_spaces.exponents import critical_exponents
from toroidal_pdo.job_management.thread_utility import ThreadUtility
from toroidal_pdo.experiments.experiment_config import ExperimentConfig
from toroidal_pdo.experiments.experiment_loader import ExperimentLoader
from toroidal_pdo.experiments.sweep_result import SweepResult, start_result

LOGGER = PDOLogger(__name__).get_logger()


def draw_atoms(cfg: ExperimentConfig, grid: TorusGrid, p: float, n_atoms: int) -> Dict[Tuple[int, int], Atom]:
    """Seeded (p,2)-atoms for every (σ, atom) cell, each on a ball with a random centre"""

    thread_utility = ThreadUtility(threads=cfg.threads, error_message='Drawing an atom failed', incrementor=100)
    for i_sigma, sigma in enumerate(cfg.sigmas):
        for i_atom in range(n_atoms):
            centre = np.random.default_rng(cfg.cell_seed(i_sigma, i_atom, 0)).random(cfg.n)
            thread_utility.launch_job((i_sigma, i_atom), make_atom, grid=grid, z=centre, sigma=sigma, p=p, q=2,
                                      seed=cfg.cell_seed(i_sigma, i_atom, 1))
    return thread_utility.collect_results()


def image_norm(symbol: Symbol, atoms: List[Atom], box: FreqBox, p: float) -> float:
    """R = max over non-zero atoms of ‖Op(symbol) a‖_p"""
    norms = [apply(symbol, atom.function, box).lp_norm(p) for atom in atoms
             if np.any(atom.function.values != 0)]
    return max(norms) if norms else 0.0


def run_threshold_sweep(cfg: ExperimentConfig) -> SweepResult:
    """H^p → L^p threshold: growth of R(m, σ) = max_a ‖T_m a‖_p as σ shrinks

    The same atoms are used for every order m. Orders m ≤ -β-nλ must keep R(σ_min)/R(σ_max) below the cap; the
    control order m_bad must exceed both the bounded ratio and the cap by the configured separation.
    """

    options = cfg.threshold
    rho, delta, beta = float(options['rho']), float(options['delta']), float(options['beta'])
    p, m, m_bad = float(options['p']), float(options['m']), float(options['m_bad'])
    n_atoms = int(options['n_atoms'])
    params = critical_exponents(cfg.n, rho, delta, beta)
    if cfg.assert_mode and p < params.p0 - 1e-12:
        raise ValueError(f'p = {p} is below the critical exponent p0 = {params.p0:.6g}; boundedness is not '
                         f'asserted there, rerun with --exploratory')
    if n_atoms < 1:
        raise ValueError(f'n_atoms must be positive (got {n_atoms})')
    orders = sorted({float(value) for value in options.get('m_values', [])} | {m, m_bad})

    grid, box = cfg.grid(), cfg.box()
    result = start_result(cfg, rho=rho, delta=delta, beta=beta, p=p)
    result.add_row('p0', params.p0)
    result.add_row('m_max', params.m_max)

    atoms = draw_atoms(cfg, grid, p, n_atoms)
    thread_utility = ThreadUtility(threads=cfg.threads, error_message='A threshold cell failed', incrementor=20)
    for i_m, order in enumerate(orders):
        symbol = cfg.make_symbol(m=order)
        for i_sigma in range(len(cfg.sigmas)):
            thread_utility.launch_job((i_m, i_sigma), image_norm, symbol=symbol,
                                      atoms=[atoms[(i_sigma, i_atom)] for i_atom in range(n_atoms)], box=box, p=p)
    norms = thread_utility.collect_results()

    smallest = int(np.argmin(cfg.sigmas))
    largest = int(np.argmax(cfg.sigmas))
    ratios = {}
    for i_m, order in enumerate(orders):
        for i_sigma, sigma in enumerate(cfg.sigmas):
            result.add_row('R', norms[(i_m, i_sigma)], m=order, sigma=sigma)
        denominator = norms[(i_m, largest)]
        ratios[order] = norms[(i_m, smallest)] / denominator if denominator > 0 else math.nan
        asserted = params.admits_order(order)
        result.add_row('sigma_ratio', ratios[order], cfg.tolerance('threshold_ratio') if asserted else None,
                       m=order)

    separation = cfg.tolerance('separation')
    result.add_row('inverse_separation', ratios[m] / ratios[m_bad] if ratios[m_bad] > 0 else math.nan,
                   None if separation is None else 1.0 / separation, m=m)
    control_over_cap = ratios[m_bad] / cfg.calibration('threshold_ratio')
    result.add_row('control_over_cap', control_over_cap, m=m_bad)
    result.add_row('cap_over_control', 1.0 / control_over_cap if control_over_cap > 0 else math.inf,
                   None if separation is None else 1.0 / separation, m=m_bad)
    drops = [max(0.0, ratios[low] - ratios[high]) for low, high in zip(orders[:-1], orders[1:])]
    result.add_row('monotonicity_violation', max(drops) if drops else 0.0)

    LOGGER.info("{0:65}: {val}".format("Ratio R(sigma_min)/R(sigma_max) by order",
                                       val=', '.join(f'm={order:g}: {ratios[order]:.4g}' for order in orders)))
    return result


class LoadModule(ExperimentLoader):

    def _load_module_options(self) -> None:
        self._parser.add_argument('--p',
                                  help="Hardy exponent p in (0,1].",
                                  type=float, dest='threshold.p', required=False, default=None)
        self._parser.add_argument('--m',
                                  help="Bounded order under test.",
                                  type=float, dest='threshold.m', required=False, default=None)
        self._parser.add_argument('--m-bad',
                                  help="Control order above the threshold.",
                                  type=float, dest='threshold.m_bad', required=False, default=None)
        self._parser.add_argument('--n-atoms',
                                  help="Atoms per sigma.",
                                  type=int, dest='threshold.n_atoms', required=False, default=None)

    def start_module(self) -> SweepResult:
        return run_threshold_sweep(self.config)
