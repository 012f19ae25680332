import copy
import math

import toml
import numpy as np

from pathlib import Path
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional

from importlib_resources import files

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.torus_fft import TorusGrid, FreqBox
from toroidal_pdo.symbol_calculus.symbol import Symbol, parse_symbol_spec

LOGGER = PDOLogger(__name__).get_logger()

DEFAULT_CONFIG = files('toroidal_pdo.experiments.resources').joinpath('default_config.toml')
SECTIONS = ('threshold', 'kernel', 'd_condition', 'sharp_max', 'verify')
FORMATS = ('csv', 'json')


class HypothesisGateError(RuntimeError):
    """Raised when an experiment refuses to run because a hypothesis of the boundedness theorem fails"""
    pass


@dataclass
class ExperimentConfig:
    """A @dataclass holding every option an experiment reads

    Values come from the packaged default_config.toml merged with user files and flags (see :func:`build_config`).
    The per-experiment tables are kept as plain dicts so runners read exactly the keys they need.
    """

    experiment: str
    n: int
    G: int
    N: int
    symbol: str
    seed: int
    sigmas: List[float]
    out: Path
    format: str
    assert_mode: bool
    threads: int
    threshold: Dict[str, Any] = field(default_factory=dict)
    kernel: Dict[str, Any] = field(default_factory=dict)
    d_condition: Dict[str, Any] = field(default_factory=dict)
    sharp_max: Dict[str, Any] = field(default_factory=dict)
    verify: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        """@dataclass automatically calls this method after calling its own __init__()"""
        self._check_opts()

    def _check_opts(self):
        self.out = Path(self.out)
        self.sigmas = [float(sigma) for sigma in self.sigmas]
        if self.n < 1:
            raise ValueError(f'Dimension n must be positive (got n = {self.n})')
        if self.N < 1:
            raise ValueError(f'Truncation radius N must be positive (got N = {self.N})')
        if not self.G > 2 * self.N:
            raise ValueError(f'Grid must resolve the frequency box: G > 2N is required (got G = {self.G}, '
                             f'N = {self.N})')
        if len(self.sigmas) == 0:
            raise ValueError('The sigma ladder is empty')
        for sigma in self.sigmas:
            if not 0 < sigma < 0.5:
                raise ValueError(f'Every sigma must lie in (0, 1/2) (got sigma = {sigma})')
        if self.format not in FORMATS:
            raise ValueError(f'Unknown output format "{self.format}", expected one of {FORMATS}')
        if self.threads < 1:
            raise ValueError(f'threads must be positive (got {self.threads})')
        for key, value in self.tolerances.items():
            if not isinstance(value, (int, float)) or math.isnan(value) or value < 0:
                raise ValueError(f'Tolerance {key} must be a non-negative number (got {value})')

    def tolerance(self, key: str) -> Optional[float]:
        """The tolerance for an asserted row, or None (informational) in exploratory mode"""
        if not self.assert_mode:
            return None
        return self.calibration(key)

    def calibration(self, key: str) -> float:
        """A calibration constant that applies whatever the assert mode"""
        if key not in self.tolerances:
            raise ValueError(f'No tolerance named "{key}" in the configuration')
        return float(self.tolerances[key])

    def grid(self, G: Optional[int] = None) -> TorusGrid:
        return TorusGrid(self.n, self.G if G is None else G)

    def box(self, N: Optional[int] = None) -> FreqBox:
        return FreqBox(self.n, self.N if N is None else N)

    def make_symbol(self, **overrides) -> Symbol:
        return parse_symbol_spec(self.symbol, n=self.n, **overrides)

    def cell_seed(self, *key: int) -> np.random.SeedSequence:
        """Independent random stream for one sweep cell, identical however cells are scheduled"""
        return np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))

    def todict(self) -> Dict[str, Any]:
        return {'experiment': self.experiment, 'n': self.n, 'G': self.G, 'N': self.N, 'symbol': self.symbol,
                'seed': self.seed, 'sigmas': self.sigmas, 'format': self.format, 'assert_mode': self.assert_mode,
                'threshold': self.threshold, 'kernel': self.kernel, 'd_condition': self.d_condition,
                'sharp_max': self.sharp_max, 'verify': self.verify, 'tolerances': self.tolerances}


def merge_tables(base: Mapping[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursive merge of two TOML tables, values of update win"""
    merged = copy.deepcopy(dict(base))
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_tables(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_toml(path: Path) -> Dict[str, Any]:
    try:
        with Path(path).open('r') as config_file:
            return toml.load(config_file)
    except OSError as err:
        raise OSError(f'Could not read configuration file {path}: {err}') from err
    except toml.TomlDecodeError as err:
        raise ValueError(f'Configuration file {path} is not valid TOML: {err}') from err


def parse_value(raw: str) -> Any:
    """Read a flag value as a TOML value, falling back to the bare string"""
    try:
        return toml.loads(f'value = {raw}')['value']
    except toml.TomlDecodeError:
        return raw


def set_dotted(table: Dict[str, Any], key: str, value: Any) -> None:
    """Assign section.key = value; bare keys address the tolerances table"""
    section, _, name = key.rpartition('.')
    if not section:
        section = 'tolerances'
    target = table
    for part in section.split('.'):
        if not isinstance(target.setdefault(part, {}), dict):
            raise ValueError(f'Cannot set {key}: {part} is not a table')
        target = target[part]
    target[name] = value


def parse_set_options(sets: Iterable[str]) -> Dict[str, Any]:
    """Turn repeated key=value strings into a nested table"""
    table = {}
    for item in sets:
        key, sep, raw = item.partition('=')
        if not sep or not key.strip():
            raise ValueError(f'--set expects key=value (got "{item}")')
        set_dotted(table, key.strip(), parse_value(raw.strip()))
    return table


def build_config(experiment: str, config_path: Optional[Path] = None,
                 flag_overrides: Optional[Mapping[str, Any]] = None,
                 sets: Iterable[str] = ()) -> ExperimentConfig:
    """Layer the packaged defaults, a user file, the experiment's override tables, flags and --set pairs

    :param experiment: Subcommand name, selects the [overrides.<experiment>] tables
    :param config_path: Optional user TOML file
    :param flag_overrides: Dotted keys from command line flags; None values are skipped
    :param sets: Raw key=value strings
    :return: A checked ExperimentConfig
    """

    table = toml.loads(DEFAULT_CONFIG.read_text())
    if config_path is not None:
        table = merge_tables(table, load_toml(config_path))

    overrides = table.pop('overrides', {})
    table = merge_tables(table, overrides.get(experiment, {}))

    flags = {}
    for key, value in (flag_overrides or {}).items():
        if value is not None:
            set_dotted(flags, key, value)
    table = merge_tables(table, flags)
    table = merge_tables(table, parse_set_options(sets))

    unknown = set(table) - {'experiment', 'tolerances', *SECTIONS}
    if unknown:
        raise ValueError(f'Unknown configuration tables: {sorted(unknown)}')

    general = table.get('experiment', {})
    try:
        config = ExperimentConfig(experiment=experiment, **general,
                                  tolerances=table.get('tolerances', {}),
                                  **{section: table.get(section, {}) for section in SECTIONS})
    except TypeError as err:
        raise ValueError(f'Bad [experiment] table {sorted(general)}: {err}') from err

    LOGGER.info("{0:65}: {val}".format("Experiment", val=experiment))
    LOGGER.info("{0:65}: n = {1}, G = {2}, N = {3}, seed = {4}".format("Reference scale", config.n, config.G,
                                                                         config.N, config.seed))
    return config
