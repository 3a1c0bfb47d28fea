"""
Covariate-to-parameter models: the parametric maturation families and the
weight-for-age surrogate.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from rkhs_gof.config import (
    ML_PER_THETA_UNIT,
    REFERENCE_TAU,
    WEIGHT_AT_BIRTH_KG,
    WEIGHT_CV,
    WEIGHT_GAIN_KG,
    WEIGHT_HALF_AGE_YEARS,
    WEIGHT_HILL_EXPONENT,
)
from rkhs_gof.errors import InputError
from rkhs_gof.pk.model import PkParamsStar

logger = logging.getLogger("PK-Covariates")

SATURABLE_EXPONENTIAL = "saturable_exponential"
AFFINE_LINEAR = "affine_linear"
MICHAELIS_MENTEN = "michaelis_menten"

TAU_NAMES: Dict[str, Tuple[str, ...]] = {
    SATURABLE_EXPONENTIAL: ("alpha", "beta", "cl_max", "v1", "q", "v2"),
    AFFINE_LINEAR: ("alpha", "beta", "v1", "q", "v2"),
    MICHAELIS_MENTEN: ("cl_max", "k_m", "v1", "q", "v2"),
}
FAMILY_KINDS: Tuple[str, ...] = tuple(TAU_NAMES)


def check_family_kind(kind: str) -> str:
    if kind not in TAU_NAMES:
        raise InputError(f"Unknown parametric family '{kind}', expected one of {FAMILY_KINDS}")
    return kind


def clearance_star(kind: str, tau: np.ndarray, ages: np.ndarray) -> np.ndarray:
    """CL*(a) in mL/day for family ``kind``."""
    if kind == SATURABLE_EXPONENTIAL:
        alpha, beta, cl_max = tau[0], tau[1], tau[2]
        return (1.0 - alpha * np.exp(-beta * ages)) * cl_max
    if kind == AFFINE_LINEAR:
        return tau[0] + tau[1] * ages
    return tau[0] * ages / (tau[1] + ages)


def tau_is_admissible(kind: str, tau: np.ndarray, ages: Optional[np.ndarray] = None) -> bool:
    """
    Parameter-domain check for ``tau``, and positivity of CL* at ``ages`` when given.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.size != len(TAU_NAMES[kind]) or not np.all(np.isfinite(tau)):
        return False
    if np.any(tau[-3:] <= 0):
        return False
    if kind == SATURABLE_EXPONENTIAL and not (0 <= tau[0] <= 1 and tau[1] > 0 and tau[2] > 0):
        return False
    if kind == MICHAELIS_MENTEN and not (tau[0] > 0 and tau[1] > 0):
        return False
    if ages is not None and np.any(clearance_star(kind, tau, np.asarray(ages, float)) <= 0):
        return False
    return True


@dataclass(frozen=True)
class ParametricFamily:
    """
    A parametric covariate model f_tau(a) = (CL*(a), V1*, Q*, V2*).

    Attributes:
        kind (str): One of FAMILY_KINDS.
        tau (Tuple[float, ...]): Parameters in mL, mL/day, 1/year units (see TAU_NAMES).
    """

    kind: str
    tau: Tuple[float, ...]

    def __post_init__(self) -> None:
        check_family_kind(self.kind)
        tau = tuple(float(v) for v in np.asarray(self.tau, dtype=float).reshape(-1))
        object.__setattr__(self, "tau", tau)
        if len(tau) != len(TAU_NAMES[self.kind]):
            raise InputError(f"{self.kind} needs {len(TAU_NAMES[self.kind])} parameters")
        if not tau_is_admissible(self.kind, np.asarray(tau)):
            raise InputError(f"Parameters {tau} are outside the {self.kind} domain")

    @classmethod
    def reference(cls) -> "ParametricFamily":
        """The saturable exponential model used to generate the simulation data."""
        names = TAU_NAMES[SATURABLE_EXPONENTIAL]
        return cls(SATURABLE_EXPONENTIAL, tuple(REFERENCE_TAU[k] for k in names))

    @property
    def names(self) -> Tuple[str, ...]:
        return TAU_NAMES[self.kind]

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.tau, dtype=float)

    def clearance(self, ages: Any) -> np.ndarray:
        """CL*(a) in mL/day."""
        return clearance_star(self.kind, self.vector, np.asarray(ages, dtype=float))

    def eval(self, age: float) -> PkParamsStar:
        if age < 0:
            raise InputError(f"Age must be nonnegative, got {age}")
        v1, q, v2 = self.tau[-3:]
        return PkParamsStar(float(self.clearance(age)), v1, q, v2)

    def theta(self, ages: Any) -> np.ndarray:
        """Estimation-coordinate parameters f_tau(a_i) in L and L/day, shape (n, 4)."""
        ages = np.atleast_1d(np.asarray(ages, dtype=float))
        out = np.empty((ages.size, 4))
        out[:, 0] = self.clearance(ages)
        out[:, 1:] = self.vector[-3:]
        return out / ML_PER_THETA_UNIT

    def tau_jacobian(self, ages: Any) -> np.ndarray:
        """
        Derivative of ``theta(ages)`` with respect to tau.

        Returns:
            np.ndarray: Shape (n, 4, k) with k = len(tau).
        """
        ages = np.atleast_1d(np.asarray(ages, dtype=float))
        k = len(self.tau)
        out = np.zeros((ages.size, 4, k))
        t = self.vector
        if self.kind == SATURABLE_EXPONENTIAL:
            decay = np.exp(-t[1] * ages)
            out[:, 0, 0] = -decay * t[2]
            out[:, 0, 1] = t[0] * ages * decay * t[2]
            out[:, 0, 2] = 1.0 - t[0] * decay
        elif self.kind == AFFINE_LINEAR:
            out[:, 0, 0] = 1.0
            out[:, 0, 1] = ages
        else:
            out[:, 0, 0] = ages / (t[1] + ages)
            out[:, 0, 1] = -t[0] * ages / (t[1] + ages) ** 2
        for j in range(3):
            out[:, 1 + j, k - 3 + j] = 1.0
        return out / ML_PER_THETA_UNIT

    def is_admissible(self, ages: Any) -> bool:
        """True when CL*(a) > 0 at every age in ``ages``."""
        return tau_is_admissible(self.kind, self.vector, np.asarray(ages, dtype=float))

    def with_tau(self, tau: Any) -> "ParametricFamily":
        return ParametricFamily(self.kind, tuple(np.asarray(tau, dtype=float)))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "tau": dict(zip(self.names, self.tau))}

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "ParametricFamily":
        kind = check_family_kind(record["kind"])
        tau = record["tau"]
        if isinstance(tau, dict):
            tau = [tau[name] for name in TAU_NAMES[kind]]
        return cls(kind, tuple(tau))


def covariate_family_eval(family: ParametricFamily, age: float) -> PkParamsStar:
    """Weight-normalized parameters f_tau(age) in mL and mL/day."""
    return family.eval(age)


@dataclass(frozen=True)
class WeightModel:
    """
    Lognormal body weight around a Hill-type median growth curve.

    w_med(a) = birth + gain * a^h / (a^h + half_age^h); individual weights are
    w_med(a) * exp(s z) with z standard normal and s^2 = ln(1 + cv^2).
    """

    birth: float = WEIGHT_AT_BIRTH_KG
    gain: float = WEIGHT_GAIN_KG
    exponent: float = WEIGHT_HILL_EXPONENT
    half_age: float = WEIGHT_HALF_AGE_YEARS
    cv: float = WEIGHT_CV

    def __post_init__(self) -> None:
        if self.birth <= 0 or self.gain < 0 or self.exponent <= 0 or self.half_age <= 0:
            raise InputError("Weight model needs positive birth weight, exponent and half age")
        if self.cv < 0:
            raise InputError("Weight coefficient of variation must be nonnegative")

    @property
    def log_sd(self) -> float:
        return float(np.sqrt(np.log1p(self.cv**2)))

    def median(self, age: Any) -> np.ndarray:
        a = np.asarray(age, dtype=float) ** self.exponent
        return self.birth + self.gain * a / (a + self.half_age**self.exponent)

    def sample(self, ages: Any, rng: np.random.Generator) -> np.ndarray:
        ages = np.asarray(ages, dtype=float)
        return self.median(ages) * np.exp(self.log_sd * rng.standard_normal(ages.shape))

    def to_dict(self) -> Dict[str, float]:
        return {
            "birth": self.birth,
            "gain": self.gain,
            "exponent": self.exponent,
            "half_age": self.half_age,
            "cv": self.cv,
        }


def weight_for_age(
    age: float, rng: np.random.Generator, model: Optional[WeightModel] = None
) -> float:
    """
    Draws one body weight in kg for a child of the given age.

    Args:
        age (float): Age in years, within [0, 20].
        rng (np.random.Generator): Random stream.
        model (Optional[WeightModel]): Surrogate parameters; defaults to WeightModel().

    Returns:
        float: A positive weight.
    """
    if not 0 <= age <= 20:
        raise InputError(f"Age must lie in [0, 20] years, got {age}")
    model = model or WeightModel()
    return float(model.sample(np.asarray([age]), rng)[0])
