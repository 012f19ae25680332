import warnings

import numpy as np
import statsmodels.api as sm

from typing import Sequence

from toroidal_pdo.pdo_logger import PDOLogger

LOGGER = PDOLogger(__name__).get_logger()


# Class that holds results from least-squares slope fits
class SlopeFitResult:

    def __init__(self, label: str, n_points: int, slope: float = float('nan'), intercept: float = float('nan'),
                 std_err: float = float('nan'), max_residual: float = float('nan')):

        self.label = label
        self.n_points = n_points
        self.slope = slope
        self.intercept = intercept
        self.std_err = std_err
        self.max_residual = max_residual

    @property
    def is_fitted(self) -> bool:
        return bool(np.isfinite(self.slope))

    def todict(self):
        return {'label': self.label,
                'n_points': self.n_points,
                'slope': self.slope,
                'intercept': self.intercept,
                'std_err': self.std_err,
                'max_residual': self.max_residual}


def fit_slope(label: str, x: Sequence[float], y: Sequence[float]) -> SlopeFitResult:
    """Ordinary least squares fit y ≈ intercept + slope·x

    Fewer than two points leave the result unfitted (NaN slope). With exactly two points the standard error is
    undefined and reported as NaN.

    :param label: Name carried into result tables
    :param x: Regressor values
    :param y: Response values
    :return: A SlopeFitResult
    """

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 2 or np.ptp(x) == 0:
        LOGGER.warning(f'Not enough distinct points to fit {label} (found {x.size})')
        return SlopeFitResult(label, int(x.size))

    with warnings.catch_warnings(), np.errstate(all='ignore'):
        warnings.simplefilter('ignore')
        model = sm.OLS(y, sm.add_constant(x, has_constant='add')).fit()
        std_err = float(model.bse[1]) if x.size > 2 else float('nan')

    return SlopeFitResult(label, int(x.size), slope=float(model.params[1]), intercept=float(model.params[0]),
                          std_err=std_err, max_residual=float(np.max(np.abs(model.resid))))


def fit_log_slope(label: str, x: Sequence[float], y: Sequence[float], base: float = 2.0,
                  log_x: bool = False) -> SlopeFitResult:
    """Fit log_base(y) against x (or against log_base(x) when log_x is set); non-positive y are dropped"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    if log_x:
        keep &= x > 0
    with np.errstate(divide='ignore', invalid='ignore'):
        regressor = np.log(x[keep]) / np.log(base) if log_x else x[keep]
        return fit_slope(label, regressor, np.log(y[keep]) / np.log(base))
