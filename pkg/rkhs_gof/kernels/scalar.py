"""
Scalar kernels on the age covariate.

A scalar kernel is either a Gaussian (infinite-dimensional, always handled in dual
form), a kernel with a finite feature map (constant or polynomial features), or the
zero kernel used for components that carry no nonparametric part.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from rkhs_gof.errors import InputError

logger = logging.getLogger("Kernels-Scalar")

GAUSSIAN = "gaussian"
CONSTANT = "constant"
FINITE_FEATURE = "finite_feature"
ZERO = "zero"
KINDS = (GAUSSIAN, CONSTANT, FINITE_FEATURE, ZERO)

# Feature descriptors for finite_feature kernels
FEATURE_CONSTANT = "constant"
FEATURE_POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class ScalarKernelSpec:
    """
    Description of one diagonal entry k_l of a matrix-valued kernel.

    Attributes:
        kind (str): One of ``gaussian``, ``constant``, ``finite_feature``, ``zero``.
        bandwidth (Optional[float]): Gaussian bandwidth in years.
        dim (Optional[int]): Feature dimension of a finite_feature kernel.
        feature (Optional[str]): ``constant`` or ``polynomial`` feature descriptor.
        scale (float): Age scale of polynomial features, phi_j(a) = (a / scale)^j.
    """

    kind: str
    bandwidth: Optional[float] = None
    dim: Optional[int] = None
    feature: Optional[str] = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"Unknown scalar kernel kind '{self.kind}'")
        if self.kind == GAUSSIAN:
            if self.bandwidth is None or not math.isfinite(self.bandwidth) or self.bandwidth <= 0:
                raise InputError("Gaussian bandwidth must be strictly positive")
        if self.kind == FINITE_FEATURE:
            if self.dim is None or self.dim < 1:
                raise InputError("finite_feature kernels need dim >= 1")
            if self.feature not in (FEATURE_CONSTANT, FEATURE_POLYNOMIAL):
                raise InputError(f"Unknown feature descriptor '{self.feature}'")
            if self.feature == FEATURE_CONSTANT and self.dim != 1:
                raise InputError("Constant feature map has dimension 1")
            if self.scale <= 0:
                raise InputError("Polynomial feature scale must be positive")

    # --- Constructors ---

    @classmethod
    def gaussian(cls, bandwidth: float) -> "ScalarKernelSpec":
        return cls(GAUSSIAN, bandwidth=float(bandwidth))

    @classmethod
    def constant(cls) -> "ScalarKernelSpec":
        return cls(CONSTANT)

    @classmethod
    def polynomial(cls, degree: int, scale: float = 1.0) -> "ScalarKernelSpec":
        return cls(FINITE_FEATURE, dim=int(degree) + 1, feature=FEATURE_POLYNOMIAL, scale=scale)

    @classmethod
    def zero(cls) -> "ScalarKernelSpec":
        return cls(ZERO)

    # --- Structure ---

    def canonical(self) -> "ScalarKernelSpec":
        """Rewrites the constant kernel as a one-dimensional finite feature map."""
        if self.kind == CONSTANT:
            return ScalarKernelSpec(FINITE_FEATURE, dim=1, feature=FEATURE_CONSTANT)
        return self

    @property
    def has_feature_map(self) -> bool:
        return self.kind != GAUSSIAN

    @property
    def feature_dim(self) -> int:
        """Dimension d_l of the finite feature map (0 for the zero kernel)."""
        if self.kind == GAUSSIAN:
            raise InputError("Gaussian kernels have no finite feature map")
        if self.kind == ZERO:
            return 0
        if self.kind == CONSTANT:
            return 1
        return int(self.dim)

    def features(self, ages: np.ndarray) -> np.ndarray:
        """
        Evaluates the feature map phi_l at every age.

        Args:
            ages (np.ndarray): Ages in years, shape (m,).

        Returns:
            np.ndarray: Feature matrix of shape (m, d_l).
        """
        ages = np.asarray(ages, dtype=float).reshape(-1)
        spec = self.canonical()
        if spec.kind == ZERO:
            return np.zeros((ages.size, 0))
        if spec.feature == FEATURE_CONSTANT:
            return np.ones((ages.size, 1))
        powers = np.arange(spec.dim)
        return (ages[:, None] / spec.scale) ** powers[None, :]

    def gram(self, ages_a: np.ndarray, ages_b: np.ndarray) -> np.ndarray:
        """Kernel matrix k_l(a_i, b_j) between two age vectors."""
        ages_a = np.asarray(ages_a, dtype=float).reshape(-1)
        ages_b = np.asarray(ages_b, dtype=float).reshape(-1)
        if self.kind == GAUSSIAN:
            diff = ages_a[:, None] - ages_b[None, :]
            return np.exp(-(diff**2) / (2.0 * self.bandwidth**2))
        return self.features(ages_a) @ self.features(ages_b).T

    # --- Serialization ---

    def to_dict(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {"kind": self.kind}
        if self.kind == GAUSSIAN:
            record["bandwidth"] = self.bandwidth
        if self.kind == FINITE_FEATURE:
            record.update({"dim": self.dim, "feature": self.feature, "scale": self.scale})
        return record

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "ScalarKernelSpec":
        try:
            return cls(
                kind=record["kind"],
                bandwidth=record.get("bandwidth"),
                dim=record.get("dim"),
                feature=record.get("feature"),
                scale=float(record.get("scale", 1.0)),
            )
        except KeyError as exc:
            raise InputError(f"Kernel component is missing field {exc}") from exc


def eval_scalar_kernel(spec: ScalarKernelSpec, a: float, a2: float) -> float:
    """
    Evaluates a scalar kernel at a pair of ages.

    Args:
        spec (ScalarKernelSpec): Kernel description.
        a (float): First age in years.
        a2 (float): Second age in years.

    Returns:
        float: k(a, a2); Gaussian values lie in (0, 1].
    """
    if spec.kind == GAUSSIAN:
        return math.exp(-((a - a2) ** 2) / (2.0 * spec.bandwidth**2))
    phi = spec.features(np.array([a, a2]))
    return float(phi[0] @ phi[1])
