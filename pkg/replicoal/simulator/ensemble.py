import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from replicoal.utils import log, make_rng


def resolve_threads(threads: int | None) -> int:
    """
    Worker thread count: ``threads`` if given, else the ``REPLICOAL_THREADS`` environment variable, else 1.
    """
    if threads is None:
        env = os.getenv("REPLICOAL_THREADS", "")
        try:
            threads = int(env) if env else 1
        except ValueError:
            log.warning(f"ignoring invalid REPLICOAL_THREADS={env!r}")
            threads = 1
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    return threads


def run_ensemble[T](
    fn: Callable[[int, np.random.Generator], T], n_runs: int, seed: int | None, threads: int | None = None
) -> list[T]:
    """
    Run ``fn(run_index, generator)`` for every run index.

    Each run gets its own generator ``make_rng(seed, run_index)``, so results depend on
    ``seed`` only and not on the thread count.

    Returns:
        Results in run order.
    """
    if n_runs < 0:
        raise ValueError(f"n_runs must be nonnegative, got {n_runs}")
    threads = resolve_threads(threads)
    log.info(f"ensemble: {n_runs} runs, seed={seed}, threads={threads}")

    def one(i: int) -> T:
        return fn(i, make_rng(seed, i))

    if threads == 1:
        return [one(i) for i in range(n_runs)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, range(n_runs)))
