import time

import pytest

from toroidal_pdo.job_management.thread_utility import ThreadUtility


def _square(value: int, delay: float = 0.0) -> int:
    time.sleep(delay)
    return value * value


def _fail(value: int) -> int:
    raise ArithmeticError(f'cannot process {value}')


@pytest.mark.parametrize(
    argnames=['threads', 'keys'],
    argvalues=zip([1, 2, 4],
                  [[3, 1, 2], [(1, 0), (0, 1), (0, 0)], ['b', 'c', 'a']])
)
def test_results_are_ordered_by_key(threads: int, keys: list):
    """Results come back sorted by key whatever the completion order

    1. A single worker with integer keys
    2. Two workers with tuple keys, as used for (sigma, atom) cells
    3. Four workers with string keys

    :param threads: Number of worker threads
    :param keys: Job keys in submission order
    """

    thread_utility = ThreadUtility(threads=threads, error_message='A test job failed', incrementor=1)
    for position, key in enumerate(keys):
        # later submissions finish first
        thread_utility.launch_job(key, _square, value=position, delay=0.01 * (len(keys) - position))
    results = thread_utility.collect_results()

    assert list(results) == sorted(keys)
    for position, key in enumerate(keys):
        assert results[key] == position * position


def test_iteration_yields_keyed_results():
    thread_utility = ThreadUtility(threads=2)
    for value in range(5):
        thread_utility.launch_job(value, _square, value=value)
    assert sorted(thread_utility) == [(value, value * value) for value in range(5)]


def test_failed_job_raises():
    thread_utility = ThreadUtility(threads=2, error_message='A sweep cell failed')
    thread_utility.launch_job(0, _square, value=2)
    thread_utility.launch_job(1, _fail, value=3)
    with pytest.raises(RuntimeError, match='A sweep cell failed'):
        thread_utility.collect_results()


def test_duplicate_keys_rejected():
    thread_utility = ThreadUtility(threads=1)
    thread_utility.launch_job('cell', _square, value=1)
    with pytest.raises(ValueError):
        thread_utility.launch_job('cell', _square, value=2)
    thread_utility.collect_results()


def test_empty_pool_and_late_submission():
    with pytest.raises(RuntimeError):
        ThreadUtility(threads=1).collect_results()

    thread_utility = ThreadUtility(threads=1)
    thread_utility.launch_job(0, _square, value=1)
    thread_utility.collect_results()
    with pytest.raises(RuntimeError):
        thread_utility.launch_job(1, _square, value=2)


def test_thread_factor_exceeds_threads():
    with pytest.raises(ValueError):
        ThreadUtility(threads=2, thread_factor=4)
