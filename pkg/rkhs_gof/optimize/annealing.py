"""
Simulated annealing with Gaussian proposals and geometric cooling.
"""

import logging
import math
import time
from typing import Callable, Optional

import numpy as np

from rkhs_gof.errors import InputError
from rkhs_gof.optimize.options import SolverOptions, SolverReport

logger = logging.getLogger("Optimize-Annealing")


def simulated_annealing(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    opts: Optional[SolverOptions] = None,
) -> SolverReport:
    """
    Gradient-free minimization by Metropolis moves under a cooling schedule.

    The temperature starts at ``temperature_start`` and is multiplied by
    ``temperature_decay`` after every ``moves_per_temperature`` proposals. Proposals are
    Gaussian with standard deviation step_scale * (T / T0) * (1 + |x|). Exactly two
    random draws are consumed per move, so a seed fixes the whole trajectory.

    Returns:
        SolverReport: The best point visited and its objective value.
    """
    opts = opts or SolverOptions()
    start = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    x = np.asarray(x0, dtype=float).copy()
    f = float(objective(x))
    if not np.isfinite(f):
        raise InputError("Objective is not finite at the starting point")
    best_x, best_f = x.copy(), f
    temperature = opts.temperature_start
    total = opts.sa_iterations()

    for move in range(total):
        if move and move % opts.moves_per_temperature == 0:
            temperature *= opts.temperature_decay
        scale = opts.step_scale * (temperature / opts.temperature_start) * (1.0 + np.abs(x))
        candidate = x + scale * rng.standard_normal(x.size)
        u = rng.random()
        f_candidate = float(objective(candidate))
        if not np.isfinite(f_candidate):
            continue
        if f_candidate <= f or u < math.exp(-(f_candidate - f) / temperature):
            x, f = candidate, f_candidate
            if f < best_f:
                best_x, best_f = x.copy(), f

    logger.debug(f"Annealing finished: best={best_f:.6e}, final temperature={temperature:.3e}")
    return SolverReport(
        x=best_x,
        fun=best_f,
        iterations=total,
        converged=True,
        elapsed=time.perf_counter() - start,
        message="cooling schedule completed",
        evaluations=total + 1,
    )
