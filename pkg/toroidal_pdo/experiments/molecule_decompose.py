import numpy as np

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.hardy_spaces.atoms import make_atom
from toroidal_pdo.experiments.experiment_config import ExperimentConfig
from toroidal_pdo.experiments.experiment_loader import ExperimentLoader
from toroidal_pdo.experiments.hp_pipeline import add_molecule_rows, molecule_cell, molecule_params
from toroidal_pdo.experiments.sweep_result import SweepResult, start_result

LOGGER = PDOLogger(__name__).get_logger()


def run_molecule_decompose(cfg: ExperimentConfig) -> SweepResult:
    """One atom per σ through the operator, with the full decomposition (ψ_j, φ_j, ν_j, λ_j) kept in the extras"""

    p = float(cfg.threshold['p'])
    params = molecule_params(cfg)
    symbol = cfg.make_symbol()
    grid, box = cfg.grid(), cfg.box()
    result = start_result(cfg, m=symbol.claimed_order, rho=params.rho, delta=params.delta, beta=params.beta, p=p)

    decompositions = []
    for i_sigma, sigma in enumerate(cfg.sigmas):
        centre = np.random.default_rng(cfg.cell_seed(i_sigma, 0, 0)).random(cfg.n)
        atom = make_atom(grid, centre, sigma, p, 2, cfg.cell_seed(i_sigma, 0, 1))
        cell = molecule_cell(symbol, atom, box, params, cfg, keep_decomposition=True)
        add_molecule_rows(result, cfg, sigma, [cell])
        decompositions.append({'sigma': sigma, 'molecule': cell['molecule'], 'decomposition': cell['decomposition']})

    result.extras['decompositions'] = decompositions
    return result


class LoadModule(ExperimentLoader):

    def _load_module_options(self) -> None:
        self._parser.add_argument('--p',
                                  help="Hardy exponent p in (0,1].",
                                  type=float, dest='threshold.p', required=False, default=None)

    def start_module(self) -> SweepResult:
        return run_molecule_decompose(self.config)
