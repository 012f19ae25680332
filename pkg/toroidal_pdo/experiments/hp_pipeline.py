import math

import numpy as np

from typing import Any, Dict, Optional

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import FreqBox
from toroidal_pdo.symbol_calculus.symbol import Symbol
from toroidal_pdo.quantizer.quantizer import apply, t_star_one
from toroidal_pdo.hardy_spaces.atoms import Atom
from toroidal_pdo.hardy_spaces.exponents import ThresholdParams, critical_exponents
from toroidal_pdo.hardy_spaces.molecules import molecule_decompose, molecule_validate
from toroidal_pdo.job_management.thread_utility import ThreadUtility
from toroidal_pdo.experiments.experiment_config import ExperimentConfig, HypothesisGateError
from toroidal_pdo.experiments.experiment_loader import ExperimentLoader
from toroidal_pdo.experiments.sweep_result import SweepResult, start_result
from toroidal_pdo.experiments.threshold import draw_atoms

LOGGER = PDOLogger(__name__).get_logger()


def molecule_params(cfg: ExperimentConfig) -> ThresholdParams:
    """Exponents for the H^p → H^p statement: ω = 1, α = ρ and β = n/2 admitted"""
    options = cfg.threshold
    rho = float(options['rho'])
    return critical_exponents(cfg.n, rho, float(options['delta']), float(options['beta']), omega=1.0, alpha=rho,
                              allow_beta_endpoint=True)


def molecule_cell(symbol: Symbol, atom: Atom, box: FreqBox, params: ThresholdParams, cfg: ExperimentConfig,
                  keep_decomposition: bool = False) -> Dict[str, Any]:
    """Ta, its molecule constants and its atomic decomposition for one atom"""

    image = apply(symbol, atom.function, box)
    molecule = molecule_validate(image, atom.z, atom.sigma, atom.p, params, cap=cfg.calibration('molecule_cap'),
                                 residual_tolerance=cfg.calibration('residual'))
    cell = {'c_max': max(molecule.c1, molecule.c2), 'residual': molecule.residual, 'mu': molecule.mu,
            'molecule': molecule.todict(), 'reconstruction_error': math.nan, 'atom_failures': math.nan,
            'hp_bound': math.nan, 'decomposition': None}
    try:
        decomposition = molecule_decompose(image, atom.z, atom.sigma, atom.p,
                                           tolerance=cfg.calibration('residual'))
    except ValueError as err:
        LOGGER.error(f'Decomposition refused at sigma = {atom.sigma:g}: {err}')
        return cell

    reports = decomposition.validate_atoms(cfg.calibration('atom'))
    cell.update({'reconstruction_error': decomposition.reconstruction_error(image),
                 'atom_failures': sum(not report.passed for report in reports),
                 'hp_bound': decomposition.hp_bound})
    if keep_decomposition:
        cell['decomposition'] = decomposition.todict(cfg.calibration('atom'))
    return cell


def add_molecule_rows(result: SweepResult, cfg: ExperimentConfig, sigma: float, cells: list) -> None:
    """Per-σ rows summarising a list of molecule cells"""

    hp_bounds = np.array([cell['hp_bound'] for cell in cells], dtype=float)
    result.add_row('molecule_c_max', max(cell['c_max'] for cell in cells), cfg.tolerance('molecule_cap'),
                   sigma=sigma)
    result.add_row('molecule_residual', max(cell['residual'] for cell in cells), cfg.tolerance('residual'),
                   sigma=sigma)
    result.add_row('reconstruction_error', np.max([cell['reconstruction_error'] for cell in cells]),
                   cfg.tolerance('reconstruction'), sigma=sigma)
    failures = np.max([cell['atom_failures'] for cell in cells])
    result.add_row('atom_failures', failures, 0.0 if cfg.assert_mode else None, sigma=sigma)
    result.add_row('hp_bound_max', np.max(hp_bounds), cfg.tolerance('hp_cap'), sigma=sigma)
    finite = hp_bounds[np.isfinite(hp_bounds) & (hp_bounds > 0)]
    result.add_row('hp_bound_spread', float(np.max(finite) / np.min(finite)) if finite.size else math.nan,
                   sigma=sigma)


def check_gate(cfg: ExperimentConfig, symbol: Symbol, result: Optional[SweepResult] = None) -> float:
    """Refuse to continue unless T*(1) = 0 in BMO up to the configured tolerance"""

    _, value = t_star_one(symbol, cfg.box(), cfg.grid())
    gate = cfg.calibration('t_star_bmo')
    if result is not None:
        result.add_row('t_star_bmo', value, gate)
    if not value <= gate:
        LOGGER.error(f'T*(1) has BMO norm {value:.3e} > {gate:g} for {symbol.name}')
        raise HypothesisGateError(f'Hypothesis "T*(1)=0 in the sense of BMO" fails for {symbol.name}: '
                                  f'BMO norm of T*(1) is {value:.3e} > {gate:g}; the H^p pipeline refuses to run')
    return value


def run_hp_pipeline(cfg: ExperimentConfig) -> SweepResult:
    """Atoms through the operator, then molecule validation and atomic decomposition of every image

    Refuses with HypothesisGateError before drawing any atom when T*(1) ≠ 0 in BMO.
    """

    options = cfg.threshold
    p = float(options['p'])
    n_atoms = int(options['n_atoms'])
    params = molecule_params(cfg)
    symbol = cfg.make_symbol()
    if cfg.assert_mode and p <= params.p0 + 1e-12:
        raise ValueError(f'H^p boundedness needs p0 < p (got p = {p}, p0 = {params.p0:.6g}); rerun with --exploratory')

    result = start_result(cfg, m=symbol.claimed_order, rho=params.rho, delta=params.delta, beta=params.beta, p=p)
    check_gate(cfg, symbol, result)

    result.add_row('beta_endpoint', float(params.boundary))
    result.add_row('theta', params.theta)
    result.add_row('window_consistency', float(params.window_consistent()))

    grid, box = cfg.grid(), cfg.box()
    atoms = draw_atoms(cfg, grid, p, n_atoms)
    thread_utility = ThreadUtility(threads=cfg.threads, error_message='A molecule cell failed', incrementor=100)
    for key, atom in atoms.items():
        thread_utility.launch_job(key, molecule_cell, symbol=symbol, atom=atom, box=box, params=params, cfg=cfg)
    cells = thread_utility.collect_results()

    for i_sigma, sigma in enumerate(cfg.sigmas):
        sigma_cells = [cells[(i_sigma, i_atom)] for i_atom in range(n_atoms)]
        result.add_row('mu', sigma_cells[0]['mu'], sigma=sigma)
        add_molecule_rows(result, cfg, sigma, sigma_cells)

    return result


class LoadModule(ExperimentLoader):

    def _load_module_options(self) -> None:
        self._parser.add_argument('--p',
                                  help="Hardy exponent p in (0,1].",
                                  type=float, dest='threshold.p', required=False, default=None)
        self._parser.add_argument('--beta',
                                  help="Exponent beta with (1-rho)n/2 <= beta <= n/2.",
                                  type=float, dest='threshold.beta', required=False, default=None)
        self._parser.add_argument('--n-atoms',
                                  help="Atoms per sigma.",
                                  type=int, dest='threshold.n_atoms', required=False, default=None)

    def start_module(self) -> SweepResult:
        return run_hp_pipeline(self.config)
