"""
The nonlinear Tikhonov functional in mixed formulation.
"""

import logging
from typing import Any, Optional

import numpy as np

from rkhs_gof.errors import RkhsGofError
from rkhs_gof.inverse.models import MechanisticModel
from rkhs_gof.kernels.operators import MixedOperators, per_parameter

logger = logging.getLogger("Estimators-Objective")


class TikhonovObjective:
    """
    Q(gamma) = (1/n) sum_i ||y_i - G(g(x_i) + h_gamma(x_i), x_i)||^2 + lam gamma^T D gamma.

    ``offset`` holds the fixed parametric values g(x_i); it is zero for the purely
    nonparametric problem. Points where G is undefined have Q = inf.

    Args:
        model (MechanisticModel): Forward operator.
        dataset: Object exposing ``y`` and ``covariates``.
        ops (MixedOperators): Operators of the dataset's covariates.
        lam (float): Regularization parameter.
        offset (Optional[np.ndarray]): Fixed parametric part, shape (n, p).
    """

    def __init__(
        self,
        model: MechanisticModel,
        dataset: Any,
        ops: MixedOperators,
        lam: float,
        offset: Optional[np.ndarray] = None,
    ):
        self.model = model
        self.y = np.asarray(dataset.y, dtype=float)
        self.covariates = dataset.covariates
        self.ops = ops
        self.lam = float(lam)
        self.offset = np.zeros((ops.n, ops.p)) if offset is None else np.asarray(offset, float)
        self.evaluations = 0

    @property
    def n(self) -> int:
        return self.ops.n

    def theta(self, gamma: np.ndarray) -> np.ndarray:
        return self.offset + self.ops.theta(gamma)

    def residuals(self, gamma: np.ndarray) -> np.ndarray:
        """y_i - G(theta_i, x_i), shape (n, q); raises outside the model domain."""
        return self.y - self.model.predict(self.theta(gamma), self.covariates)

    def penalty(self, gamma: np.ndarray) -> float:
        return self.lam * float(gamma @ self.ops.Dmat @ gamma)

    def __call__(self, gamma: np.ndarray) -> float:
        return self.value(gamma)

    def value(self, gamma: np.ndarray) -> float:
        self.evaluations += 1
        try:
            r = self.residuals(gamma)
        except RkhsGofError:
            return float("inf")
        value = float(np.sum(r**2)) / self.n + self.penalty(gamma)
        return value if np.isfinite(value) else float("inf")

    def misfit(self, gamma: np.ndarray) -> float:
        """Mean squared residual over all n q observations."""
        try:
            r = self.residuals(gamma)
        except RkhsGofError:
            return float("inf")
        return float(np.mean(r**2))

    def gradient(self, gamma: np.ndarray) -> np.ndarray:
        """
        -(2/n) M^T vec(J_i^T r_i) + 2 lam D gamma, with vec in per-parameter stacking.

        Returns NaN entries where G or its Jacobian is undefined.
        """
        theta = self.theta(gamma)
        try:
            r = self.y - self.model.predict(theta, self.covariates)
            J = self.model.jacobian(theta, self.covariates)
        except RkhsGofError:
            return np.full(gamma.shape, np.nan)
        per_individual = np.einsum("iqp,iq->ip", J, r)
        return -(2.0 / self.n) * self.ops.Mmat.T @ per_parameter(per_individual) + (
            2.0 * self.lam * (self.ops.Dmat @ gamma)
        )
