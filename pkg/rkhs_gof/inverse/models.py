"""
Forward operators G(theta, x) mapping per-individual parameters to observations.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from rkhs_gof.config import FD_RELATIVE_STEP
from rkhs_gof.errors import DomainError, InputError, LinearizationError

logger = logging.getLogger("Inverse-Models")


class MechanisticModel(ABC):
    """
    A known parameter-to-observation map, evaluated for all individuals at once.

    Attributes:
        p (int): Number of model parameters per individual.
        q (int): Number of observations per individual.
    """

    p: int
    q: int

    @abstractmethod
    def predict(self, theta: np.ndarray, covariates: Any) -> np.ndarray:
        """
        Evaluates G for every individual.

        Args:
            theta (np.ndarray): Parameters, shape (n, p).
            covariates: Covariate records, shape (n, 2).

        Returns:
            np.ndarray: Predictions, shape (n, q).

        Raises:
            DomainError: If some theta_i lies outside the model's domain.
        """

    def jacobian(self, theta: np.ndarray, covariates: Any) -> np.ndarray:
        """
        Derivatives L(x_i) = D_theta G(theta_i, x_i) by central differences.

        The step for parameter l of individual i is FD_RELATIVE_STEP * max(1, |theta_il|).

        Returns:
            np.ndarray: Jacobians, shape (n, q, p).

        Raises:
            LinearizationError: If a perturbed evaluation leaves the domain or is not finite.
        """
        theta = np.asarray(theta, dtype=float)
        n = theta.shape[0]
        out = np.empty((n, self.q, self.p))
        for l in range(self.p):
            h = FD_RELATIVE_STEP * np.maximum(1.0, np.abs(theta[:, l]))
            upper, lower = theta.copy(), theta.copy()
            upper[:, l] += h
            lower[:, l] -= h
            g_up = self._checked_predict(upper, covariates)
            g_low = self._checked_predict(lower, covariates)
            out[:, :, l] = (g_up - g_low) / (2.0 * h[:, None])
        return out

    def _checked_predict(self, theta: np.ndarray, covariates: Any) -> np.ndarray:
        try:
            values = self.predict(theta, covariates)
        except DomainError as exc:
            index = exc.index if exc.index is not None else -1
            raise LinearizationError(
                f"Jacobian evaluation outside the model domain: {exc}", index
            ) from exc
        bad = ~np.all(np.isfinite(values), axis=1)
        if bad.any():
            raise LinearizationError(
                "Non-finite model value during differentiation", int(np.argmax(bad))
            )
        return values


class DirectModel(MechanisticModel):
    """G(theta, x) = theta: the direct (denoising) problem with q = p."""

    def __init__(self, p: int):
        if p < 1:
            raise InputError("DirectModel needs at least one parameter")
        self.p = p
        self.q = p

    def predict(self, theta: np.ndarray, covariates: Any = None) -> np.ndarray:
        return np.array(theta, dtype=float, copy=True)

    def jacobian(self, theta: np.ndarray, covariates: Any = None) -> np.ndarray:
        n = np.asarray(theta).shape[0]
        return np.broadcast_to(np.eye(self.p), (n, self.p, self.p)).copy()


class LinearModel(MechanisticModel):
    """G(theta, x) = A theta with a fixed q x p coefficient matrix."""

    def __init__(self, A: np.ndarray):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        self.A = A
        self.q, self.p = A.shape

    def predict(self, theta: np.ndarray, covariates: Any = None) -> np.ndarray:
        return np.asarray(theta, dtype=float) @ self.A.T

    def jacobian(self, theta: np.ndarray, covariates: Any = None) -> np.ndarray:
        n = np.asarray(theta).shape[0]
        return np.broadcast_to(self.A, (n, self.q, self.p)).copy()
