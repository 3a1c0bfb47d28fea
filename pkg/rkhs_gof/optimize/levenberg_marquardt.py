"""
Damped Gauss-Newton (Levenberg-Marquardt) for nonlinear least squares.

The damping term is scaled by diag(J^T J) (Marquardt scaling), so the method is
insensitive to the very different magnitudes of covariate-model parameters.
"""

import logging
import time
from typing import Callable, Optional

import numpy as np

from rkhs_gof.config import FD_RELATIVE_STEP, LM_DAMPING_FACTOR
from rkhs_gof.errors import FiniteDifferenceError, InputError
from rkhs_gof.optimize.derivatives import finite_diff_jacobian
from rkhs_gof.optimize.options import SolverOptions, SolverReport

logger = logging.getLogger("Optimize-LevenbergMarquardt")

MAX_DAMPING = 1e16


def levenberg_marquardt(
    residuals: Callable[[np.ndarray], np.ndarray],
    tau0: np.ndarray,
    opts: Optional[SolverOptions] = None,
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> SolverReport:
    """
    Minimizes ||residuals(tau)||^2 starting from ``tau0``.

    Args:
        residuals (Callable): Map from a k-vector to an m-vector of residuals.
        tau0 (np.ndarray): Starting point; residuals must be finite there.
        opts (Optional[SolverOptions]): Tolerances, damping and iteration budget.
        jacobian (Optional[Callable]): Analytic (m, k) Jacobian; central differences otherwise.

    Returns:
        SolverReport: Final point and sum of squared residuals. A run that cannot make
        progress returns a non-converged report rather than raising.
    """
    opts = opts or SolverOptions()
    start = time.perf_counter()
    x = np.asarray(tau0, dtype=float).copy()
    r = np.asarray(residuals(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise InputError("Residuals are not finite at the starting point")
    cost = float(r @ r)
    evaluations = 1
    mu = opts.initial_damping
    jac = jacobian or (lambda z: finite_diff_jacobian(residuals, z, FD_RELATIVE_STEP))

    converged, message, iteration = False, "iteration budget exhausted", 0
    for iteration in range(1, opts.lm_iterations() + 1):
        try:
            J = np.asarray(jac(x), dtype=float)
        except FiniteDifferenceError as exc:
            message = f"Jacobian failed: {exc}"
            break
        g = J.T @ r
        if np.max(np.abs(g)) < opts.gradient_tolerance:
            converged, message = True, "gradient tolerance reached"
            break

        A = J.T @ J
        scaling = np.diag(A).copy()
        scaling = np.maximum(scaling, 1e-12 * max(scaling.max(), np.finfo(float).tiny))

        accepted = False
        while mu <= MAX_DAMPING:
            try:
                delta = np.linalg.solve(A + mu * np.diag(scaling), -g)
            except np.linalg.LinAlgError:
                mu *= LM_DAMPING_FACTOR
                continue
            x_new = x + delta
            r_new = np.asarray(residuals(x_new), dtype=float)
            evaluations += 1
            if np.all(np.isfinite(r_new)) and float(r_new @ r_new) < cost:
                accepted = True
                mu /= LM_DAMPING_FACTOR
                break
            mu *= LM_DAMPING_FACTOR

        if not accepted:
            message = "damping exceeded its limit without reducing the residual"
            break

        x, r, cost = x_new, r_new, float(r_new @ r_new)
        logger.debug(f"LM iteration {iteration}: cost={cost:.6e}, damping={mu:.2e}")
        if np.linalg.norm(delta) <= opts.step_tolerance * (np.linalg.norm(x) + opts.step_tolerance):
            converged, message = True, "step tolerance reached"
            break

    return SolverReport(
        x=x,
        fun=cost,
        iterations=iteration,
        converged=converged,
        elapsed=time.perf_counter() - start,
        message=message,
        evaluations=evaluations,
    )
