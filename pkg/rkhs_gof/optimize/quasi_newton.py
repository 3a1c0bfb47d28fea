"""
BFGS quasi-Newton minimization with an Armijo backtracking line search.
"""

import logging
import time
from typing import Callable, Optional

import numpy as np

from rkhs_gof.config import ARMIJO_CONSTANT, BACKTRACK_SHRINK
from rkhs_gof.errors import InputError
from rkhs_gof.optimize.options import SolverOptions, SolverReport

logger = logging.getLogger("Optimize-QuasiNewton")

MIN_STEP = 1e-20
RELATIVE_GRADIENT = float(np.sqrt(np.finfo(float).eps))


def quasi_newton(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    opts: Optional[SolverOptions] = None,
) -> SolverReport:
    """
    Minimizes ``objective`` with BFGS updates of the inverse Hessian.

    Points where the objective or gradient is not finite are treated as failed trial
    steps, so the line search backs away from invalid regions. Accepted steps never
    increase the objective.

    Args:
        objective (Callable): Scalar objective.
        gradient (Callable): Its gradient.
        x0 (np.ndarray): Starting point; the objective must be finite there.
        opts (Optional[SolverOptions]): Tolerances and iteration budget.

    Returns:
        SolverReport: Final point and objective value.
    """
    opts = opts or SolverOptions()
    start = time.perf_counter()
    x = np.asarray(x0, dtype=float).copy()
    f = float(objective(x))
    g = np.asarray(gradient(x), dtype=float)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise InputError("Objective or gradient is not finite at the starting point")
    evaluations = 1
    n = x.size
    H = np.eye(n)
    first_update = True

    converged, message, iteration = False, "iteration budget exhausted", 0
    for iteration in range(1, opts.qn_iterations() + 1):
        if np.max(np.abs(g), initial=0.0) <= opts.gradient_tolerance:
            converged, message = True, "gradient tolerance reached"
            iteration -= 1
            break
        direction = -H @ g
        slope = float(g @ direction)
        if slope >= 0:
            H = np.eye(n)
            direction, slope = -g, -float(g @ g)

        step = 1.0
        accepted = False
        while step > MIN_STEP:
            x_new = x + step * direction
            f_new = float(objective(x_new))
            evaluations += 1
            if np.isfinite(f_new) and f_new <= f + ARMIJO_CONSTANT * step * slope:
                g_new = np.asarray(gradient(x_new), dtype=float)
                if np.all(np.isfinite(g_new)):
                    accepted = True
                    break
            step *= BACKTRACK_SHRINK
        if not accepted:
            # No representable decrease left: accept as converged near a stationary point.
            converged = bool(np.max(np.abs(g)) <= RELATIVE_GRADIENT * (1.0 + abs(f)))
            message = "line search failed to find a decrease"
            break

        s = x_new - x
        y = g_new - g
        x, f, g = x_new, f_new, g_new
        logger.debug(f"QN iteration {iteration}: f={f:.6e}, step={step:.2e}")

        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            if first_update:
                H = (sy / float(y @ y)) * np.eye(n)
                first_update = False
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)

        if np.linalg.norm(s) <= opts.step_tolerance * (1.0 + np.linalg.norm(x)):
            converged, message = True, "step tolerance reached"
            break

    return SolverReport(
        x=x,
        fun=f,
        iterations=iteration,
        converged=converged,
        elapsed=time.perf_counter() - start,
        message=message,
        evaluations=evaluations,
    )
