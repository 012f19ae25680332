import math
import dataclasses

import numpy as np

from typing import Dict, List, Tuple

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.quantizer.quantizer import FrequencyCutoff
from toroidal_pdo.quantizer.kernel_estimates import AnnulusEstimate, annulus_kernel_estimate
from toroidal_pdo.linear_model.slope_fit import fit_log_slope
from toroidal_pdo.job_management.thread_utility import ThreadUtility
from toroidal_pdo.experiments.experiment_config import ExperimentConfig
from toroidal_pdo.experiments.experiment_loader import ExperimentLoader
from toroidal_pdo.experiments.sweep_result import SweepResult, start_result

LOGGER = PDOLogger(__name__).get_logger()


def _centres(cfg: ExperimentConfig) -> List[np.ndarray]:
    centres = []
    for centre in cfg.kernel.get('centres', [0.0]):
        centres.append(np.broadcast_to(np.asarray(centre, dtype=float), (cfg.n,)).copy())
    return centres


def _merge_centres(estimates: List[AnnulusEstimate]) -> Tuple[AnnulusEstimate, float]:
    """Max of I_j over centres, and the relative spread of Σ_j I_j across them"""
    stacked = np.vstack([estimate.integrals for estimate in estimates])
    totals = np.sum(stacked, axis=1)
    spread = float((np.max(totals) - np.min(totals)) / np.max(totals)) if np.max(totals) > 0 else 0.0
    return dataclasses.replace(estimates[0], integrals=np.max(stacked, axis=0)), spread


def run_kernel_decay(cfg: ExperimentConfig) -> SweepResult:
    """Annulus integrals I_j of kernel differences over the σ ladder, fitted in j and in σ

    For every σ, γ and side the j-slope of log2 I_j is compared with -1/ρ (asserted at the configured
    slope_sigmas), the σ-exponent of I_j with 1 - γ/ρ (one-sided: I_j may decay faster in σ than the bound;
    only annuli clear of the antipodal region enter the σ-fits) and
    I_j/(2^(-j/ρ) σ^(1-γ/ρ)) gives the bound constant.
    """

    symbol = cfg.make_symbol()
    m, rho, delta = symbol.claimed_order, symbol.claimed_rho, symbol.claimed_delta
    lam = max(0.0, (delta - rho) / 2.0)
    order_limit = -cfg.n * ((1.0 - rho) / 2.0 + lam)
    if cfg.assert_mode and m > order_limit + 1e-12:
        raise ValueError(f'kernel-decay asserts the annulus bound only for m <= -n[(1-rho)/2 + lambda] = '
                         f'{order_limit:g} (got m = {m:g}); rerun with --exploratory')

    kernel_options = cfg.kernel
    grid, box = cfg.grid(), cfg.box()
    cutoff = FrequencyCutoff.from_string(kernel_options.get('cutoff', 'smooth'))
    epsilon = float(kernel_options.get('epsilon', 0.25))
    gammas = [float(gamma) for gamma in kernel_options.get('gammas', [1.0])]
    sides = list(kernel_options.get('sides', ['right', 'left']))
    slope_sigmas = {float(sigma) for sigma in kernel_options.get('slope_sigmas', [])}
    min_cells = int(kernel_options.get('min_cells', 32))
    centres = _centres(cfg)

    result = start_result(cfg, m=m, rho=rho, delta=delta)
    thread_utility = ThreadUtility(threads=cfg.threads, error_message='A kernel-decay job failed',
                                   incrementor=50)
    for i_sigma, sigma in enumerate(cfg.sigmas):
        for i_gamma, gamma in enumerate(gammas):
            for i_side, side in enumerate(sides):
                for i_centre, centre in enumerate(centres):
                    thread_utility.launch_job((i_sigma, i_gamma, i_side, i_centre), annulus_kernel_estimate,
                                              p=symbol, z=centre, sigma=sigma, gamma=gamma, box=box, grid=grid,
                                              side=side, epsilon=epsilon, cutoff=cutoff,
                                              n_probes=int(kernel_options.get('n_probes', 8 * cfg.n)),
                                              probe_fraction=float(kernel_options.get('probe_fraction', 0.9)),
                                              seed=cfg.cell_seed(i_sigma, i_centre))
    estimates = thread_utility.collect_results()

    merged: Dict[Tuple[int, int, int], AnnulusEstimate] = {}
    for i_sigma, sigma in enumerate(cfg.sigmas):
        for i_gamma, gamma in enumerate(gammas):
            for i_side, side in enumerate(sides):
                estimate, spread = _merge_centres([estimates[(i_sigma, i_gamma, i_side, i_centre)]
                                                   for i_centre in range(len(centres))])
                merged[(i_sigma, i_gamma, i_side)] = estimate
                label = f'[{side},gamma={gamma:g}]'

                fit = estimate.fit(min_cells)
                result.add_fit(fit, fit_kind='j', side=side, gamma=gamma, sigma=sigma)
                asserted = sigma in slope_sigmas and estimate.regime == 'small'
                result.add_row(f'j_slope{label}', fit.slope, sigma=sigma)
                result.add_row(f'j_slope_deviation{label}', abs(fit.slope + 1.0 / rho),
                               cfg.tolerance('j_slope') if asserted else None, sigma=sigma)
                if len(centres) > 1:
                    result.add_row(f'center_spread{label}', spread, sigma=sigma)

    for i_gamma, gamma in enumerate(gammas):
        target = 1.0 - gamma / rho
        for i_side, side in enumerate(sides):
            label = f'[{side},gamma={gamma:g}]'
            small = [(sigma, merged[(i_sigma, i_gamma, i_side)]) for i_sigma, sigma in enumerate(cfg.sigmas)
                     if merged[(i_sigma, i_gamma, i_side)].regime == 'small']

            bound_constant = 0.0
            for sigma, estimate in small:
                for j, integral in zip(estimate.js, estimate.integrals):
                    bound_constant = max(bound_constant,
                                         integral / (2.0 ** (-j / rho) * sigma ** (1.0 - gamma / rho)))
            result.add_row(f'bound_constant{label}', bound_constant if small else math.nan,
                           cfg.tolerance('bound_constant') if small else None)

            measured = math.inf
            all_js = sorted({j for _, estimate in small for j in estimate.js})
            for j in all_js:
                xs, ys = [], []
                for sigma, estimate in small:
                    kept = estimate.usable(min_cells) & estimate.local()
                    if j in estimate.js and kept[estimate.js.index(j)]:
                        xs.append(sigma)
                        ys.append(estimate.integrals[estimate.js.index(j)])
                if len(xs) < 2:
                    continue
                fit = fit_log_slope(f'{side}:gamma={gamma:g}:j={j}', xs, ys, log_x=True)
                result.add_fit(fit, fit_kind='sigma', side=side, gamma=gamma, j=j)
                if fit.is_fitted:
                    measured = min(measured, fit.slope)

            fitted = math.isfinite(measured)
            result.add_row(f'sigma_exponent{label}', measured if fitted else math.nan)
            result.add_row(f'sigma_exponent_shortfall{label}', max(0.0, target - measured) if fitted else math.nan,
                           cfg.tolerance('sigma_exponent') if fitted else None)

    result.extras['annuli'] = [record for estimate in merged.values()
                               for record in estimate.to_frame().to_dict('records')]
    return result


class LoadModule(ExperimentLoader):

    def _load_module_options(self) -> None:
        self._parser.add_argument('--gammas',
                                  help="Comma-separated annulus exponents gamma in (0,1].",
                                  type=self.comma_float, dest='kernel.gammas', required=False, default=None)
        self._parser.add_argument('--sides',
                                  help="Kernel sides to estimate (right, left or both, comma-separated).",
                                  type=lambda value: value.split(','), dest='kernel.sides', required=False,
                                  default=None)

    def start_module(self) -> SweepResult:
        return run_kernel_decay(self.config)
