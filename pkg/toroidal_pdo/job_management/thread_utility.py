import os

from typing import Any, Callable, Dict, Hashable, Iterator, Optional, Tuple
from concurrent import futures
from concurrent.futures import ThreadPoolExecutor

from toroidal_pdo.pdo_logger import PDOLogger


class ThreadUtility:
    """Run keyed sweep jobs on a thread pool and hand the results back in key order

    Every job is submitted with a hashable key. Iterating yields (key, result) tuples as jobs finish;
    collect_results() waits for all of them and returns a dict sorted by key so that downstream output does not
    depend on completion order. Any failed job raises a RuntimeError carrying error_message.

    :param threads: Threads available, defaults to the CPU count
    :param error_message: Prefix of the RuntimeError raised when a job fails
    :param incrementor: Log progress every this many finished jobs
    :param thread_factor: Threads used by each job; the pool runs threads // thread_factor workers
    """

    def __init__(self, threads: Optional[int] = None, error_message: str = "A ThreadUtility job failed.",
                 incrementor: int = 500, thread_factor: int = 1):

        self._logger = PDOLogger(__name__).get_logger()

        self._error_message = error_message
        self._incrementor = incrementor
        self._closed = False
        self._finished = 0

        self._threads = self._cpu_threads() if threads is None else threads
        if self._threads < thread_factor:
            raise ValueError(f'thread_factor ({thread_factor}) exceeds the threads available ({self._threads})')

        self._executor = ThreadPoolExecutor(max_workers=max(1, self._threads // thread_factor))
        self._jobs: Dict[Hashable, futures.Future] = {}
        self._keys: Dict[futures.Future, Hashable] = {}

    def launch_job(self, key: Hashable, function: Callable, **kwargs) -> None:
        if self._closed:
            raise RuntimeError('Jobs cannot be launched once results are being collected')
        if key in self._jobs:
            raise ValueError(f'Duplicate job key {key}')
        future = self._executor.submit(function, **kwargs)
        self._jobs[key] = future
        self._keys[future] = key

    def __iter__(self) -> Iterator[Tuple[Hashable, Any]]:
        self._closed = True
        if not self._jobs:
            raise RuntimeError('No jobs were launched')

        self._logger.info("{0:65}: {val}".format("Jobs to run", val=len(self._jobs)))
        self._pending = futures.as_completed(self._keys)
        return self

    def __next__(self) -> Tuple[Hashable, Any]:
        future = next(self._pending)
        key = self._keys[future]
        self._log_progress()
        try:
            return key, future.result()
        except Exception as err:
            self._executor.shutdown(wait=False)
            raise RuntimeError(f'{self._error_message} (job {key}): {err}') from err

    def collect_results(self) -> Dict[Hashable, Any]:
        """Wait for every job and return {key: result} sorted by key"""
        results = dict(self)
        self._executor.shutdown(wait=True)
        return {key: results[key] for key in sorted(results)}

    def _log_progress(self) -> None:
        self._finished += 1
        total = len(self._jobs)
        if self._finished % self._incrementor == 0 or self._finished == total:
            self._logger.info("{0:65}: {1} / {2} ({3:0.2f}%)".format("Jobs finished", self._finished, total,
                                                                     100 * self._finished / total))

    def _cpu_threads(self) -> int:
        threads = os.cpu_count() or 1
        self._logger.info("{0:65}: {val}".format("Threads available", val=threads))
        return threads
