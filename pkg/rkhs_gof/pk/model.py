"""
Two-compartment kinetics after intravenous bolus dosing.

Closed-form central concentration, allometric weight scaling, multiple dosing by
superposition, and the analytic derivatives of ln C1 with respect to the
weight-normalized parameters.
"""

import logging
from dataclasses import dataclass
from typing import Any, Sequence, Tuple

import numpy as np

from rkhs_gof.config import (
    ALLOMETRIC_CLEARANCE_EXPONENT,
    ALLOMETRIC_VOLUME_EXPONENT,
    DOSE_PER_KG_MG,
    DOSING_INTERVAL_DAYS,
    ML_PER_THETA_UNIT,
    REFERENCE_WEIGHT_KG,
)
from rkhs_gof.errors import DegenerateEigenvalueError, DomainError, InputError
from rkhs_gof.inverse.models import MechanisticModel

logger = logging.getLogger("PK-Model")

DEGENERACY_TOLERANCE = 1e-12
PARAMETER_NAMES = ("cl", "v1", "q", "v2")


@dataclass(frozen=True)
class PkParamsStar:
    """
    Weight-normalized parameters for the 70 kg reference individual.

    Attributes:
        cl (float): CL* in mL/day.
        v1 (float): V1* in mL.
        q (float): Q* in mL/day.
        v2 (float): V2* in mL.
    """

    cl: float
    v1: float
    q: float
    v2: float

    def as_theta(self) -> np.ndarray:
        """The estimation coordinate (L, L/day)."""
        return np.array([self.cl, self.v1, self.q, self.v2], dtype=float) / ML_PER_THETA_UNIT

    @classmethod
    def from_theta(cls, theta: Sequence[float]) -> "PkParamsStar":
        cl, v1, q, v2 = (float(v) * ML_PER_THETA_UNIT for v in theta)
        return cls(cl, v1, q, v2)


@dataclass(frozen=True)
class PkParams:
    """Individual parameters after allometric scaling (mL, mL/day)."""

    cl: float
    v1: float
    q: float
    v2: float

    def rate_constants(self) -> Tuple[float, float, float]:
        """(k10, k12, k21) in 1/day."""
        return self.cl / self.v1, self.q / self.v1, self.q / self.v2


@dataclass(frozen=True)
class DosingSchedule:
    """
    Repeated i.v. bolus doses at t = 0, interval, 2 interval, ...

    Attributes:
        dose_per_kg (float): Dose in mg per kg body weight.
        interval (float): Days between doses.
        n_doses (int): Number of doses.
    """

    dose_per_kg: float = DOSE_PER_KG_MG
    interval: float = DOSING_INTERVAL_DAYS
    n_doses: int = 1

    def __post_init__(self) -> None:
        if self.dose_per_kg <= 0 or self.interval <= 0:
            raise InputError("Dose and dosing interval must be positive")
        if self.n_doses < 1:
            raise InputError("At least one dose is required")

    def dose_mg(self, weight: Any) -> np.ndarray:
        return self.dose_per_kg * np.asarray(weight, dtype=float)

    def dose_times(self) -> np.ndarray:
        return self.interval * np.arange(self.n_doses)


def allometric_factors(weight: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Multipliers (w/70)^0.75 for CL and Q and (w/70)^1 for V1 and V2."""
    ratio = np.asarray(weight, dtype=float) / REFERENCE_WEIGHT_KG
    return ratio**ALLOMETRIC_CLEARANCE_EXPONENT, ratio**ALLOMETRIC_VOLUME_EXPONENT


def allometric_scale(theta_star: PkParamsStar, w: float) -> PkParams:
    """
    Scales reference parameters to an individual of weight ``w`` kg.

    Args:
        theta_star (PkParamsStar): Weight-normalized parameters.
        w (float): Body weight in kg, must be positive.

    Returns:
        PkParams: Individual parameters.
    """
    if not w > 0:
        raise InputError(f"Body weight must be positive, got {w}")
    flow, volume = allometric_factors(w)
    return PkParams(
        cl=theta_star.cl * float(flow),
        v1=theta_star.v1 * float(volume),
        q=theta_star.q * float(flow),
        v2=theta_star.v2 * float(volume),
    )


def _eigenvalues(cl, v1, q, v2):
    """
    Disposition rates lambda_1 > lambda_2 > 0 (the eigenvalues are -lambda).

    lambda_2 is taken as p / lambda_1, which stays accurate when elimination is slow.
    """
    s = (cl + q) / v1 + q / v2
    prod = cl * q / (v1 * v2)
    k21 = q / v2
    r = np.sqrt((cl / v1 + q / v1 - k21) ** 2 + 4.0 * (q / v1) * k21)
    lam1 = 0.5 * (s + r)
    lam2 = prod / lam1
    return s, prod, k21, r, lam1, lam2


def _check_degenerate(r, lam1) -> None:
    bad = np.ravel(r <= DEGENERACY_TOLERANCE * lam1)
    if bad.any():
        raise DegenerateEigenvalueError("Coinciding disposition eigenvalues", int(np.argmax(bad)))


def _profile(lam1, lam2, k21, tau):
    """F(tau) with C1 = (D / V1) F, for tau >= 0."""
    e1, e2 = np.exp(-lam1 * tau), np.exp(-lam2 * tau)
    return ((lam1 - k21) * e1 + (k21 - lam2) * e2) / (lam1 - lam2)


def two_cmt_concentration(theta: PkParams, dose_mg: float, t: Any) -> Any:
    """
    Central concentration after a single bolus at t = 0.

    Args:
        theta (PkParams): Individual parameters in mL and mL/day.
        dose_mg (float): Bolus dose in mg.
        t: Time(s) in days, t >= 0.

    Returns:
        Concentration in mg/L, same shape as ``t``.

    Raises:
        DomainError: For nonpositive parameters.
        DegenerateEigenvalueError: When both disposition rates coincide.
    """
    values = np.array([theta.cl, theta.v1, theta.q, theta.v2], dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise DomainError(f"PK parameters must be positive, got {values.tolist()}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InputError("Times must be nonnegative")
    _, _, k21, r, lam1, lam2 = _eigenvalues(*values)
    _check_degenerate(r, lam1)
    v1_litre = theta.v1 / ML_PER_THETA_UNIT
    out = dose_mg / v1_litre * _profile(lam1, lam2, k21, t_arr)
    return float(out) if np.ndim(out) == 0 else out


class TwoCompartmentModel(MechanisticModel):
    """
    G(theta, x) = (ln C1(t_1), ..., ln C1(t_q)) for a population of individuals.

    theta holds (CL*, V1*, Q*, V2*) in L and L/day; covariates hold (age, weight) rows.
    """

    p = 4

    def __init__(self, schedule: DosingSchedule, times: Sequence[float]):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size == 0 or np.any(times < 0):
            raise InputError("Observation times must be a nonempty list of nonnegative days")
        self.schedule = schedule
        self.times = times
        self.q = times.size
        # lag[k, j] = t_j minus the k-th dose time, masked where that dose is still due.
        lag = times[None, :] - schedule.dose_times()[:, None]
        self._given = lag >= 0
        self._lag = np.where(self._given, lag, 0.0)

    def _scaled(self, theta: np.ndarray, covariates: Any):
        theta = np.asarray(theta, dtype=float)
        records = np.asarray(covariates, dtype=float)
        if theta.ndim != 2 or theta.shape[1] != 4:
            raise InputError(f"theta must have shape (n, 4), got {theta.shape}")
        if records.ndim != 2 or records.shape != (theta.shape[0], 2):
            raise InputError("Covariates must be (age, weight) records matching theta")
        weight = records[:, 1]
        if np.any(~np.isfinite(weight)) or np.any(weight <= 0):
            raise InputError("Body weights must be positive")
        bad = ~np.all(np.isfinite(theta) & (theta > 0), axis=1)
        if bad.any():
            raise DomainError("PK parameters must be positive", int(np.argmax(bad)))
        flow, volume = allometric_factors(weight)
        cl, v1 = theta[:, 0] * flow, theta[:, 1] * volume
        q, v2 = theta[:, 2] * flow, theta[:, 3] * volume
        return cl, v1, q, v2, flow, volume, self.schedule.dose_mg(weight)

    def _concentration_parts(self, cl, v1, q, v2, dose):
        s, prod, k21, r, lam1, lam2 = _eigenvalues(cl, v1, q, v2)
        _check_degenerate(r, lam1)
        col = (slice(None), None, None)
        F = _profile(lam1[col], lam2[col], k21[col], self._lag[None]) * self._given[None]
        unit = dose / v1
        return s, prod, k21, r, lam1, lam2, F, unit

    def predict(self, theta: np.ndarray, covariates: Any) -> np.ndarray:
        cl, v1, q, v2, _, _, dose = self._scaled(theta, covariates)
        *_, F, unit = self._concentration_parts(cl, v1, q, v2, dose)
        return np.log(unit[:, None] * F.sum(axis=1))

    def jacobian(self, theta: np.ndarray, covariates: Any) -> np.ndarray:
        """
        Analytic derivatives of ln C1(t_j) with respect to (CL*, V1*, Q*, V2*).

        Returns:
            np.ndarray: Shape (n, q, 4).
        """
        cl, v1, q, v2, flow, volume, dose = self._scaled(theta, covariates)
        s, prod, k21, r, lam1, lam2, F, unit = self._concentration_parts(cl, v1, q, v2, dose)
        col = (slice(None), None, None)
        L1, L2, K21, tau = lam1[col], lam2[col], k21[col], self._lag[None]
        delta = L1 - L2
        e1, e2 = np.exp(-L1 * tau), np.exp(-L2 * tau)
        given = self._given[None]
        dF_dk21 = (e2 - e1) / delta * given
        dF_dlam1 = (e1 * (1.0 - tau * (L1 - K21)) - F) / delta * given
        dF_dlam2 = (F - e2 * (1.0 + tau * (K21 - L2))) / delta * given

        dlam1_ds, dlam1_dp = 0.5 * (1.0 + s / r), -1.0 / r
        dlam2_ds, dlam2_dp = 0.5 * (1.0 - s / r), 1.0 / r

        # Partial derivatives of (s, p, k21) with respect to (CL, V1, Q, V2).
        ds = np.stack([1.0 / v1, -(cl + q) / v1**2, 1.0 / v1 + 1.0 / v2, -q / v2**2], axis=1)
        dp = np.stack([q / (v1 * v2), -prod / v1, cl / (v1 * v2), -prod / v2], axis=1)
        dk = np.stack([np.zeros_like(cl), np.zeros_like(cl), 1.0 / v2, -q / v2**2], axis=1)
        dlam1 = dlam1_ds[:, None] * ds + dlam1_dp[:, None] * dp
        dlam2 = dlam2_ds[:, None] * ds + dlam2_dp[:, None] * dp

        # (n, doses, q, 4)
        dF = (
            dF_dlam1[..., None] * dlam1[:, None, None, :]
            + dF_dlam2[..., None] * dlam2[:, None, None, :]
            + dF_dk21[..., None] * dk[:, None, None, :]
        )
        total = F.sum(axis=1)
        dlog = dF.sum(axis=1) / total[..., None]
        dlog[:, :, 1] -= 1.0 / v1[:, None]

        chain = np.stack([flow, volume, flow, volume], axis=1)
        return dlog * chain[:, None, :]


def mechanistic_G(
    theta_star: PkParamsStar, x: Sequence[float], schedule: DosingSchedule, times: Sequence[float]
) -> np.ndarray:
    """
    Log concentrations of one individual.

    Args:
        theta_star (PkParamsStar): Weight-normalized parameters (mL, mL/day).
        x (Sequence[float]): The (age, weight) record.
        schedule (DosingSchedule): Dosing regimen.
        times (Sequence[float]): Observation times in days.

    Returns:
        np.ndarray: ln C1 in mg/L at each time.
    """
    model = TwoCompartmentModel(schedule, times)
    record = np.asarray(x, dtype=float).reshape(1, 2)
    return model.predict(theta_star.as_theta()[None, :], record)[0]


def two_cmt_jacobian(
    theta_star: PkParamsStar, x: Sequence[float], schedule: DosingSchedule, times: Sequence[float]
) -> np.ndarray:
    """Derivatives of ``mechanistic_G`` with respect to theta in L and L/day, shape (q, 4)."""
    model = TwoCompartmentModel(schedule, times)
    record = np.asarray(x, dtype=float).reshape(1, 2)
    return model.jacobian(theta_star.as_theta()[None, :], record)[0]
