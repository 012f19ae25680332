from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import FreqBox, TorusGrid
from toroidal_pdo.symbol_calculus.class_membership import class_membership
from toroidal_pdo.experiments.experiment_config import ExperimentConfig
from toroidal_pdo.experiments.experiment_loader import ExperimentLoader
from toroidal_pdo.experiments.sweep_result import SweepResult, start_result

LOGGER = PDOLogger(__name__).get_logger()


def run_verify_symbol(cfg: ExperimentConfig) -> SweepResult:
    """Sampled Hörmander constants of the configured symbol against its claimed class, for every N in verify.Ns"""

    options = cfg.verify
    symbol = cfg.make_symbol()
    grid = TorusGrid(cfg.n, int(options.get('G', cfg.G)))
    m, rho, delta = symbol.claimed_order, symbol.claimed_rho, symbol.claimed_delta
    m = float(options.get('m', m))
    result = start_result(cfg, G=grid.G, m=m, rho=rho, delta=delta)

    for N in options.get('Ns', [cfg.N]):
        report = class_membership(symbol, m, rho, delta, int(options.get('alpha_max', 2)),
                                  int(options.get('beta_max', 1)), FreqBox(cfg.n, int(N)), grid,
                                  cap=cfg.calibration('class_cap'), stability=cfg.calibration('class_stability'))
        for (alpha, beta), constant in report.constants.items():
            label = f'[alpha={"".join(map(str, alpha))},beta={"".join(map(str, beta))}]'
            result.add_row(f'class_constant{label}', constant, N=int(N))
            result.add_row(f'doubling_ratio{label}', report.ratio((alpha, beta)), cfg.tolerance('class_stability'),
                           N=int(N))
        result.add_row('class_cap', max(report.constants.values()), cfg.tolerance('class_cap'), N=int(N))
        result.extras[f'N={int(N)}'] = report.to_frame().to_dict('records')

    return result


class LoadModule(ExperimentLoader):

    def _load_module_options(self) -> None:
        self._parser.add_argument('--m',
                                  help="Claimed order, defaults to the order the symbol claims.",
                                  type=float, dest='verify.m', required=False, default=None)

    def start_module(self) -> SweepResult:
        return run_verify_symbol(self.config)
