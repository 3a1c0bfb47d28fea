"""
Deterministic task streams.

Every stochastic task draws from a generator derived from (master seed, stream, index),
and results are always gathered in task order, so output never depends on the number
of workers.
"""

import logging
from typing import Any, Callable, Iterable, List, Sequence

import numpy as np
from joblib import Parallel, delayed

logger = logging.getLogger("Parallel-Tasks")

# Stream tags keep unrelated random streams apart under one master seed.
STREAM_SIMULATION = 1
STREAM_MONTE_CARLO = 2
STREAM_POWER = 3
STREAM_BENCHMARK = 4
STREAM_FOLDS = 5


def task_seed(master_seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]])


def task_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """Returns the generator for the task identified by ``keys`` under ``master_seed``."""
    return np.random.default_rng(task_seed(master_seed, *keys))


def derived_seed(master_seed: int, *keys: int) -> int:
    """A plain integer seed for a subtask, e.g. a dataset inside a power study."""
    return int(task_seed(master_seed, *keys).generate_state(1, dtype=np.uint32)[0])


def run_tasks(func: Callable[..., Any], tasks: Iterable[Sequence[Any]], jobs: int = 1) -> List[Any]:
    """
    Applies ``func`` to every argument tuple in ``tasks``.

    Args:
        func (Callable): Worker function; must be picklable for ``jobs > 1``.
        tasks (Iterable[Sequence]): Positional argument tuples, one per task.
        jobs (int): Worker count; 1 runs in-process.

    Returns:
        List: Results in task order.
    """
    tasks = list(tasks)
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [func(*args) for args in tasks]
    logger.debug(f"Dispatching {len(tasks)} tasks to {jobs} workers")
    return Parallel(n_jobs=jobs)(delayed(func)(*args) for args in tasks)
