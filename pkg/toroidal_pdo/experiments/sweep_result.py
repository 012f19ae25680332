import json
import math

import numpy as np
import pandas as pd

from pathlib import Path
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.linear_model.slope_fit import SlopeFitResult

LOGGER = PDOLogger(__name__).get_logger()

CSV_COLUMNS = ['experiment', 'n', 'G', 'N', 'symbol', 'm', 'rho', 'delta', 'beta', 'p', 'sigma', 'statistic',
               'value', 'tolerance', 'pass']


@dataclass
class SweepRow:
    """One line of the result table; pass is None for informational rows (no tolerance)"""

    experiment: str
    n: int
    G: int
    N: int
    symbol: str
    m: float
    rho: float
    delta: float
    beta: float
    p: float
    sigma: float
    statistic: str
    value: float
    tolerance: Optional[float] = None
    passed: Optional[bool] = field(init=False)

    def __post_init__(self):
        self.value = float(self.value)
        if self.tolerance is None:
            self.passed = None
        else:
            self.tolerance = float(self.tolerance)
            self.passed = bool(self.value <= self.tolerance)

    def todict(self) -> Dict[str, Any]:
        record = asdict(self)
        record['pass'] = record.pop('passed')
        return {column: record[column] for column in CSV_COLUMNS}


class SweepResult:
    """Rows, slope fits and metadata of one experiment run

    defaults fills the descriptive columns (n, G, N, symbol, m, ...) of every row unless add_row overrides them.
    """

    def __init__(self, experiment: str, metadata: Dict[str, Any], defaults: Dict[str, Any]):

        self._logger = PDOLogger(__name__).get_logger()

        self.experiment = experiment
        self.metadata = metadata
        self.defaults = {'m': math.nan, 'rho': math.nan, 'delta': math.nan, 'beta': math.nan, 'p': math.nan,
                         'sigma': math.nan}
        self.defaults.update(defaults)
        self.rows: List[SweepRow] = []
        self.fits: List[Dict[str, Any]] = []
        self.extras: Dict[str, Any] = {}
        self.wall_time: Optional[float] = None

    def add_row(self, statistic: str, value: float, tolerance: Optional[float] = None, **columns) -> SweepRow:
        fields = dict(self.defaults)
        fields.update(columns)
        row = SweepRow(experiment=self.experiment, statistic=statistic, value=value, tolerance=tolerance, **fields)
        if row.passed is False:
            self._logger.error(f'{self.experiment}: {statistic} = {row.value:.4g} exceeds tolerance '
                               f'{row.tolerance:g} (sigma = {row.sigma:g}, m = {row.m:g})')
        self.rows.append(row)
        return row

    def add_fit(self, fit: SlopeFitResult, **context) -> None:
        record = fit.todict()
        record.update(context)
        self.fits.append(record)

    @property
    def all_passed(self) -> bool:
        return all(row.passed is not False for row in self.rows)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_passed else 1

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records([row.todict() for row in self.rows], columns=CSV_COLUMNS)


def start_result(cfg, **defaults) -> SweepResult:
    """Empty SweepResult for a config, with the configuration as metadata and n, G, N, symbol as row defaults"""
    columns = {'n': cfg.n, 'G': cfg.G, 'N': cfg.N, 'symbol': cfg.symbol}
    columns.update(defaults)
    return SweepResult(cfg.experiment, cfg.todict(), columns)


def _jsonable(value: Any) -> Any:
    """Plain JSON types with non-finite floats written as null"""
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, complex):
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, Path):
        return str(value)
    return value


def _output_path(out: Path, fmt: str) -> Path:
    out = Path(out)
    return out if out.suffix == f'.{fmt}' else out.with_name(f'{out.name}.{fmt}')


def emit(result: SweepResult, out: Path, fmt: str = 'csv') -> Path:
    """Write the result table as CSV (fixed header, row order of the run) or JSON (rows plus metadata and fits)

    :param result: Finished SweepResult
    :param out: Output path; the format suffix is added when missing
    :param fmt: 'csv' or 'json'
    :return: Path of the written file
    """

    path = _output_path(out, fmt)
    try:
        if fmt == 'csv':
            result.to_frame().to_csv(path, index=False, na_rep='')
        elif fmt == 'json':
            document = {'experiment': result.experiment,
                        'columns': CSV_COLUMNS,
                        'metadata': result.metadata,
                        'rows': [row.todict() for row in result.rows],
                        'fits': result.fits,
                        'extras': result.extras,
                        'all_passed': result.all_passed}
            with path.open('w') as json_file:
                json.dump(_jsonable(document), json_file, indent=2, sort_keys=True, allow_nan=False)
                json_file.write('\n')
        else:
            raise ValueError(f'Unknown output format "{fmt}", expected csv or json')
    except OSError as err:
        raise OSError(f'Could not write results to {path}: {err}') from err

    LOGGER.info("{0:65}: {val}".format(f'Wrote {len(result.rows)} {result.experiment} rows to', val=path))
    return path
