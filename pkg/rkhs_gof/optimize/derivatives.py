"""
Central finite-difference derivatives.
"""

import logging
from typing import Callable

import numpy as np

from rkhs_gof.config import FD_RELATIVE_STEP
from rkhs_gof.errors import FiniteDifferenceError

logger = logging.getLogger("Optimize-Derivatives")


def _steps(x: np.ndarray, relative_step: float) -> np.ndarray:
    return relative_step * np.maximum(1.0, np.abs(x))


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, relative_step: float = FD_RELATIVE_STEP
) -> np.ndarray:
    """
    Central-difference gradient of a scalar function.

    Args:
        f (Callable): Scalar function of a vector.
        x (np.ndarray): Evaluation point.
        relative_step (float): Component step is relative_step * max(1, |x_j|).

    Returns:
        np.ndarray: Gradient estimate, same shape as ``x``.
    """
    x = np.asarray(x, dtype=float)
    h = _steps(x, relative_step)
    grad = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        upper, lower = float(f(x + e)), float(f(x - e))
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise FiniteDifferenceError("Non-finite function value at perturbed point", j)
        grad[j] = (upper - lower) / (2.0 * h[j])
    return grad


def finite_diff_jacobian(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, relative_step: float = FD_RELATIVE_STEP
) -> np.ndarray:
    """
    Central-difference Jacobian of a vector function.

    Returns:
        np.ndarray: Matrix of shape (m, k) for f: R^k -> R^m.
    """
    x = np.asarray(x, dtype=float)
    h = _steps(x, relative_step)
    columns = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        upper = np.asarray(f(x + e), dtype=float)
        lower = np.asarray(f(x - e), dtype=float)
        if not (np.all(np.isfinite(upper)) and np.all(np.isfinite(lower))):
            raise FiniteDifferenceError("Non-finite function value at perturbed point", j)
        columns.append((upper - lower) / (2.0 * h[j]))
    return np.stack(columns, axis=-1)
