"""
Linearized Tikhonov problems in mixed formulation and their closed-form solution.

Observations are stacked per individual, y = (y_1, ..., y_n) with y_i in R^q, while
parameters are stacked per parameter (see rkhs_gof.kernels.operators). The operator L
therefore has one q x 1 strip per (i, l) pair: rows of individual i, column l n + i.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from rkhs_gof.errors import DomainError, InputError, LinearizationError, NumericError
from rkhs_gof.inverse.models import MechanisticModel
from rkhs_gof.kernels.operators import MixedOperators, RkhsCoefficients, per_parameter

logger = logging.getLogger("Inverse-Linear")


@dataclass(frozen=True)
class LinearizedProblem:
    """
    min_gamma (1/n) ||y_dagger - L M gamma||^2 + lam gamma^T D gamma.

    Attributes:
        Lmat (np.ndarray): Forward operator, shape (n q, n p).
        ydagger (np.ndarray): Shifted data, length n q.
        ops (MixedOperators): Mixed-formulation operators of the training covariates.
        lam (float): Regularization parameter.
    """

    Lmat: np.ndarray
    ydagger: np.ndarray
    ops: MixedOperators
    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise InputError(f"lambda must be positive, got {self.lam}")
        if not np.all(np.isfinite(self.ydagger)):
            raise InputError("Shifted data y_dagger must be finite")
        if self.Lmat.shape != (self.ydagger.size, self.ops.n * self.ops.p):
            raise InputError(f"Operator shape {self.Lmat.shape} does not match the data")

    @property
    def n(self) -> int:
        return self.ops.n

    @property
    def forward(self) -> np.ndarray:
        """L M, the map from gamma to stacked predictions."""
        return self.Lmat @ self.ops.Mmat

    def system(self):
        """Matrix and right-hand side of (P^T L^T L M + n lam I) gamma = P^T L^T y_dagger."""
        PtLt = self.ops.Pmat.T @ self.Lmat.T
        A = PtLt @ self.forward + self.n * self.lam * np.eye(self.ops.d)
        return A, PtLt @ self.ydagger

    def objective(self, gamma: np.ndarray) -> float:
        r = self.ydagger - self.forward @ gamma
        return float(r @ r) / self.n + self.lam * float(gamma @ self.ops.Dmat @ gamma)

    def gradient(self, gamma: np.ndarray) -> np.ndarray:
        F = self.forward
        return (2.0 / self.n) * F.T @ (F @ gamma - self.ydagger) + 2.0 * self.lam * (
            self.ops.Dmat @ gamma
        )


def linearize(
    model: MechanisticModel,
    base_parametric: Optional[np.ndarray],
    base_rkhs: Optional[RkhsCoefficients],
    dataset: Any,
    ops: MixedOperators,
    lam: float,
) -> LinearizedProblem:
    """
    Linearizes G around f* = g* + h* at every training covariate.

    Args:
        model (MechanisticModel): Forward operator G.
        base_parametric (Optional[np.ndarray]): g*(x_i) as an (n, p) array; None means 0.
        base_rkhs (Optional[RkhsCoefficients]): h*; None means the zero function.
        dataset: Object exposing ``y`` (n, q) and ``covariates`` (n, 2).
        ops (MixedOperators): Operators for the dataset's covariates.
        lam (float): Regularization parameter.

    Returns:
        LinearizedProblem: With y_dagger_i = y_i - G(f*(x_i), x_i) + L(x_i) h*(x_i).

    Raises:
        LinearizationError: If G or its Jacobian cannot be evaluated at some f*(x_i).
    """
    n, p = ops.n, ops.p
    y = np.asarray(dataset.y, dtype=float)
    if y.shape[0] != n:
        raise InputError(f"Dataset has {y.shape[0]} individuals, operators expect {n}")
    theta_g = np.zeros((n, p)) if base_parametric is None else np.asarray(base_parametric, float)
    theta_h = np.zeros((n, p)) if base_rkhs is None else base_rkhs.theta_at_training(ops)
    theta_star = theta_g + theta_h

    try:
        prediction = model.predict(theta_star, dataset.covariates)
    except DomainError as exc:
        raise LinearizationError(f"Cannot linearize: {exc}", exc.index or 0) from exc
    J = model.jacobian(theta_star, dataset.covariates)

    q = J.shape[1]
    Lmat = np.zeros((n * q, n * p))
    for i in range(n):
        Lmat[i * q:(i + 1) * q, i::n] = J[i]
    shift = np.einsum("iqp,ip->iq", J, theta_h)
    ydagger = (y - prediction + shift).reshape(-1)
    return LinearizedProblem(Lmat=Lmat, ydagger=ydagger, ops=ops, lam=lam)


def direct_problem(ops: MixedOperators, targets: np.ndarray, lam: float) -> LinearizedProblem:
    """
    The direct problem L = I with surrogate parameter targets.

    Args:
        targets (np.ndarray): Target parameter values theta_i, shape (n, p).
    """
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (ops.n, ops.p):
        raise InputError(f"Targets must have shape {(ops.n, ops.p)}, got {targets.shape}")
    return LinearizedProblem(
        Lmat=np.eye(ops.n * ops.p), ydagger=per_parameter(targets), ops=ops, lam=lam
    )


def solve_linear_tikhonov(prob: LinearizedProblem) -> RkhsCoefficients:
    """
    Closed-form minimizer gamma = (P^T L^T L M + n lam I)^{-1} P^T L^T y_dagger.

    Returns:
        RkhsCoefficients: The minimizer on the problem's training covariates.

    Raises:
        NumericError: If the system is numerically singular.
    """
    A, b = prob.system()
    norm_1 = np.linalg.norm(A, 1)
    lu, piv = lu_factor(A, check_finite=True)
    inverse_norm = np.linalg.norm(lu_solve((lu, piv), np.eye(A.shape[0])), 1)
    rcond = 1.0 / (norm_1 * inverse_norm) if np.isfinite(inverse_norm) and inverse_norm else 0.0
    if not rcond > np.finfo(float).eps:
        raise NumericError("Closed-form Tikhonov system is singular", rcond)
    gamma = lu_solve((lu, piv), b)
    logger.debug(f"Closed-form solve: d={A.shape[0]}, rcond={rcond:.2e}")
    return RkhsCoefficients(gamma, prob.ops.spec, prob.ops.ages)
