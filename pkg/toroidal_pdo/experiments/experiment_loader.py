import argparse

from pathlib import Path
from importlib import import_module
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Type

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.experiments.experiment_config import ExperimentConfig, build_config
from toroidal_pdo.experiments.sweep_result import SweepResult

# Subcommand -> runner module in toroidal_pdo.experiments
EXPERIMENTS = {
    'kernel-decay': 'kernel_decay',
    'threshold': 'threshold',
    'hp-pipeline': 'hp_pipeline',
    'sharp-max': 'sharp_maximal',
    'verify-symbol': 'verify_symbol',
    'molecule-decompose': 'molecule_decompose',
}


class ExperimentLoader(ABC):
    """An interface for loading one experiment and its options.

    To be found by :func:`load_experiment`, every experiment **must**:

     1. live in a module of toroidal_pdo.experiments registered in EXPERIMENTS, that **must**
     2. implement a subclass of ExperimentLoader that **must**
     3. be named LoadModule

    This interface always loads the options shared by all experiments (--config, --set, --seed, --out, --format,
    --symbol, --threads, --exploratory) and lets the experiment add its own. Experiment options use a dotted dest
    (e.g. 'threshold.p') that names the configuration key they override.

    :param experiment: Subcommand name
    :param input_args: Command line arguments following the subcommand
    """

    def __init__(self, experiment: str, input_args: List[str]):

        # Initiate logger – This can also be used by a class which implements this Interface
        self._logger = PDOLogger(__name__).get_logger()

        self.experiment = experiment
        self._input_args = input_args
        self._parser = argparse.ArgumentParser(prog=f'toroidal-pdo {experiment}')
        self._load_general_options()
        self._load_module_options()
        self.config = self._parse_options()

    @staticmethod
    def comma_float(input_str: str) -> List[float]:
        """A method that defines a 'comma_float' type for argparse. Allows for comma-separated lists of numbers
        rather than space-delimited.

        :param input_str: A string putatively separated by commas
        :return: A list of floats representing the comma-split input_str
        """

        try:
            return [float(item) for item in input_str.split(',') if item.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f'Expected comma-separated numbers (got "{input_str}")')

    def _load_general_options(self) -> None:
        """Options shared by every experiment"""

        self._parser.add_argument('--config',
                                  help="TOML file merged over the packaged default configuration.",
                                  type=Path, dest='config', required=False, default=None)
        self._parser.add_argument('--set',
                                  help="Override one configuration key (section.key=value; bare keys address "
                                       "[tolerances]). May be repeated.",
                                  type=str, dest='set', action='append', default=[], metavar='KEY=VALUE')
        self._parser.add_argument('--seed',
                                  help="Master seed for every random draw.",
                                  type=int, dest='experiment.seed', required=False, default=None)
        self._parser.add_argument('--out',
                                  help="Output path; the format suffix is added when missing.",
                                  type=str, dest='experiment.out', required=False, default=None)
        self._parser.add_argument('--format',
                                  help="Output format.",
                                  type=str, dest='experiment.format', required=False, default=None,
                                  choices=['csv', 'json'])
        self._parser.add_argument('--symbol',
                                  help="Symbol specification such as multiplier:m=-1 or exotic:m=-1,rho=0.5.",
                                  type=str, dest='experiment.symbol', required=False, default=None)
        self._parser.add_argument('--sigmas',
                                  help="Comma-separated sigma ladder.",
                                  type=self.comma_float, dest='experiment.sigmas', required=False, default=None)
        self._parser.add_argument('--threads',
                                  help="Worker threads for the sweep.",
                                  type=int, dest='experiment.threads', required=False, default=None)
        self._parser.add_argument('--exploratory',
                                  help="Report every statistic without asserting tolerances.",
                                  dest='exploratory', action='store_true')

    def _load_module_options(self) -> None:
        """Load experiment-specific options. Experiments without extra options keep this default."""
        pass

    def _parse_options(self) -> ExperimentConfig:
        options = vars(self._parser.parse_args(self._input_args))
        config_path = options.pop('config')
        sets = options.pop('set')
        flags: Dict[str, Any] = options
        if flags.pop('exploratory'):
            flags['experiment.assert_mode'] = False
        return build_config(self.experiment, config_path, flags, sets)

    @abstractmethod
    def start_module(self) -> SweepResult:
        """Run the experiment and return its results. Output is written by the caller."""
        pass


def load_experiment(experiment: str) -> Type[ExperimentLoader]:
    """Import the LoadModule class of a registered experiment

    :param experiment: Subcommand name
    :return: The experiment's LoadModule class
    """

    if experiment not in EXPERIMENTS:
        raise KeyError(f'Unknown experiment "{experiment}", expected one of {sorted(EXPERIMENTS)}')
    module = import_module(f'toroidal_pdo.experiments.{EXPERIMENTS[experiment]}')
    return getattr(module, 'LoadModule')
