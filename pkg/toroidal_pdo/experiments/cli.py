import sys
import time

from typing import List, Optional

from toroidal_pdo.pdo_logger import PDOLogger
from toroidal_pdo.experiments.experiment_loader import EXPERIMENTS, load_experiment
from toroidal_pdo.experiments.sweep_result import emit

LOGGER = PDOLogger(__name__).get_logger()

USAGE = f'usage: toroidal-pdo {{{",".join(EXPERIMENTS)}}} [options]\n' \
        f'Run "toroidal-pdo <experiment> --help" for the options of one experiment.'


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the toroidal-pdo command

    Exit codes: 0 when every asserted row passes, 1 when one fails or the run aborts (configuration, I/O, refused
    hypothesis), 2 for an unknown or missing subcommand.

    :param argv: Arguments after the program name, defaults to sys.argv[1:]
    :return: The exit code
    """

    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) == 0 or argv[0] not in EXPERIMENTS:
        if argv and argv[0] not in ('-h', '--help'):
            LOGGER.error(f'Unknown experiment "{argv[0]}"')
        print(USAGE, file=sys.stderr)
        return 0 if argv and argv[0] in ('-h', '--help') else 2

    experiment = argv[0]
    try:
        start_time = time.perf_counter()
        loader = load_experiment(experiment)(experiment, argv[1:])
        result = loader.start_module()
        result.wall_time = time.perf_counter() - start_time
        LOGGER.info("{0:65}: {val:.2f}s".format(f'Wall time for {experiment}', val=result.wall_time))
        emit(result, loader.config.out, loader.config.format)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2
    except (ValueError, RuntimeError, OSError) as err:
        LOGGER.error(f'{experiment} aborted: {err}')
        return 1
    except Exception:
        LOGGER.exception(f'{experiment} failed unexpectedly')
        return 1

    if result.exit_code != 0:
        failed = sum(row.passed is False for row in result.rows)
        LOGGER.error(f'{experiment}: {failed} asserted row(s) failed')
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
