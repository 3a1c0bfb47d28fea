"""
Diagonal matrix-valued kernels and the mixed primal/dual parametrization.

Parameter vectors are stacked per parameter: theta = (theta_.1, ..., theta_.p) with
theta_.l = (theta_1l, ..., theta_nl). The mixed coefficient vector gamma stacks, for
each component l, either n dual coefficients (Gaussian and other dual components) or
d_l primal feature weights.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Tuple

import numpy as np

from rkhs_gof.config import DEFAULT_BANDWIDTH_YEARS, PSD_RELATIVE_TOLERANCE
from rkhs_gof.errors import InputError
from rkhs_gof.kernels.scalar import GAUSSIAN, ScalarKernelSpec

logger = logging.getLogger("Kernels-Operators")


def as_ages(covariates: Any) -> np.ndarray:
    """
    Extracts the age column from covariate records.

    Accepts an age vector of shape (n,) or covariate records of shape (n, 2) holding
    (age, weight) rows.
    """
    arr = np.asarray(covariates, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    elif arr.ndim == 2:
        arr = arr[:, 0]
    elif arr.ndim != 1:
        raise InputError(f"Covariates must be 1-D ages or (n, 2) records, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("Covariate values must be finite")
    return arr


@dataclass(frozen=True)
class KernelSpec:
    """
    Diagonal matrix-valued kernel k(a, a') = diag(k_1, ..., k_p).

    Attributes:
        components (Tuple[ScalarKernelSpec, ...]): One scalar kernel per parameter.
        dual (FrozenSet[int]): Zero-based indices handled in dual form; all other
            indices are primal. Gaussian components must be dual.
    """

    components: Tuple[ScalarKernelSpec, ...]
    dual: FrozenSet[int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        components = tuple(self.components)
        if not components:
            raise InputError("A kernel needs at least one component")
        object.__setattr__(self, "components", components)
        if self.dual is None:
            dual = frozenset(l for l, c in enumerate(components) if c.kind == GAUSSIAN)
        else:
            dual = frozenset(int(l) for l in self.dual)
        object.__setattr__(self, "dual", dual)
        if not dual.issubset(range(len(components))):
            raise InputError(f"Dual indices {sorted(dual)} outside 0..{len(components) - 1}")
        for l, comp in enumerate(components):
            if comp.kind == GAUSSIAN and l not in dual:
                raise InputError(f"Gaussian component {l} must be in the dual set")

    # --- Presets ---

    @classmethod
    def nonparametric(cls, bandwidth: float = DEFAULT_BANDWIDTH_YEARS) -> "KernelSpec":
        """Gaussian kernel for clearance, constant kernels for V1*, Q*, V2*."""
        constant = ScalarKernelSpec.constant()
        return cls((ScalarKernelSpec.gaussian(bandwidth), constant, constant, constant))

    @classmethod
    def combined(cls, bandwidth: float = DEFAULT_BANDWIDTH_YEARS) -> "KernelSpec":
        """Gaussian kernel for clearance only; the other parameters stay parametric."""
        zero = ScalarKernelSpec.zero()
        return cls((ScalarKernelSpec.gaussian(bandwidth), zero, zero, zero))

    def fully_dual(self) -> "KernelSpec":
        return KernelSpec(self.components, frozenset(range(self.p)))

    # --- Structure ---

    @property
    def p(self) -> int:
        return len(self.components)

    @property
    def primal(self) -> FrozenSet[int]:
        return frozenset(range(self.p)) - self.dual

    def block_dim(self, l: int, n: int) -> int:
        return n if l in self.dual else self.components[l].feature_dim

    def mixed_dimension(self, n: int) -> int:
        """d = n |D| + sum_{l in P} d_l."""
        return sum(self.block_dim(l, n) for l in range(self.p))

    def slices(self, n: int) -> List[slice]:
        """Position of each gamma_l inside gamma."""
        out, start = [], 0
        for l in range(self.p):
            stop = start + self.block_dim(l, n)
            out.append(slice(start, stop))
            start = stop
        return out

    # --- Serialization ---

    def to_dict(self) -> Dict[str, Any]:
        return {
            "components": [c.to_dict() for c in self.components],
            "dual": sorted(self.dual),
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "KernelSpec":
        if "components" not in record:
            raise InputError("Kernel spec needs a 'components' list")
        components = tuple(ScalarKernelSpec.from_dict(c) for c in record["components"])
        dual = record.get("dual")
        return cls(components, None if dual is None else frozenset(dual))


def assemble_kernel_matrix(spec: KernelSpec, covariates: Any) -> np.ndarray:
    """
    Builds the np x np kernel matrix K with blocks K_lm = (k_lm(x_i, x_j))_ij.

    Args:
        spec (KernelSpec): Diagonal kernel.
        covariates: Ages (n,) or (age, weight) records (n, 2).

    Returns:
        np.ndarray: Block-diagonal symmetric matrix of shape (n p, n p).
    """
    ages = as_ages(covariates)
    n = ages.size
    if n < 1:
        raise InputError("At least one covariate record is required")
    K = np.zeros((n * spec.p, n * spec.p))
    for l, comp in enumerate(spec.components):
        block = slice(l * n, (l + 1) * n)
        K[block, block] = comp.gram(ages, ages)
    return K


def check_psd(matrix: np.ndarray, relative_tolerance: float = PSD_RELATIVE_TOLERANCE) -> bool:
    """Symmetric PSD check with a tolerance relative to the spectral radius."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(matrix).max())):
        return False
    eigenvalues = np.linalg.eigvalsh(matrix)
    radius = max(np.abs(eigenvalues).max(), np.finfo(float).tiny)
    return bool(eigenvalues.min() >= -relative_tolerance * radius)


@dataclass(frozen=True)
class MixedOperators:
    """
    Matrices of the mixed formulation for one set of training covariates.

    Attributes:
        Dmat (np.ndarray): d x d block-diagonal regularizer (K_ll for dual, I for primal).
        Pmat (np.ndarray): np x d matrix (I_n for dual, Phi_l for primal blocks).
        Mmat (np.ndarray): np x d matrix P D, so that theta = M gamma.
        blocks (Dict[int, np.ndarray]): Dual kernel blocks K_ll.
        spec (KernelSpec): Kernel the operators were built from.
        ages (np.ndarray): Training ages, shape (n,).
    """

    Dmat: np.ndarray
    Pmat: np.ndarray
    Mmat: np.ndarray
    blocks: Dict[int, np.ndarray]
    spec: KernelSpec
    ages: np.ndarray

    @property
    def n(self) -> int:
        return self.ages.size

    @property
    def d(self) -> int:
        return self.Dmat.shape[0]

    @property
    def p(self) -> int:
        return self.spec.p

    def theta(self, gamma: np.ndarray) -> np.ndarray:
        """Parameter values at the training covariates, shape (n, p)."""
        return (self.Mmat @ gamma).reshape(self.p, self.n).T


def assemble_mixed_operators(spec: KernelSpec, covariates: Any) -> MixedOperators:
    """
    Assembles the mixed-formulation operators D, P and M = P D.

    Args:
        spec (KernelSpec): Diagonal kernel with its primal/dual partition.
        covariates: Training ages (n,) or records (n, 2).

    Returns:
        MixedOperators: The operators for the n training covariates.
    """
    ages = as_ages(covariates)
    n = ages.size
    if n < 1:
        raise InputError("At least one covariate record is required")
    d = spec.mixed_dimension(n)
    Dmat = np.zeros((d, d))
    Pmat = np.zeros((n * spec.p, d))
    blocks: Dict[int, np.ndarray] = {}
    for l, (comp, cols) in enumerate(zip(spec.components, spec.slices(n))):
        rows = slice(l * n, (l + 1) * n)
        if l in spec.dual:
            K_ll = comp.gram(ages, ages)
            blocks[l] = K_ll
            Dmat[cols, cols] = K_ll
            Pmat[rows, cols] = np.eye(n)
        else:
            width = cols.stop - cols.start
            Dmat[cols, cols] = np.eye(width)
            Pmat[rows, cols] = comp.features(ages)
    logger.debug(f"Mixed operators assembled: n={n}, p={spec.p}, d={d}")
    return MixedOperators(
        Dmat=Dmat, Pmat=Pmat, Mmat=Pmat @ Dmat, blocks=blocks, spec=spec, ages=ages
    )


@dataclass(frozen=True)
class RkhsCoefficients:
    """
    An RKHS function h_gamma in mixed form together with its training covariates.

    Attributes:
        gamma (np.ndarray): Mixed coefficient vector of length d.
        spec (KernelSpec): Kernel and partition defining the parametrization.
        train_covariates (np.ndarray): Training ages, shape (n,).
    """

    gamma: np.ndarray
    spec: KernelSpec
    train_covariates: np.ndarray

    def __post_init__(self) -> None:
        ages = as_ages(self.train_covariates)
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        object.__setattr__(self, "train_covariates", ages)
        object.__setattr__(self, "gamma", gamma)
        expected = self.spec.mixed_dimension(ages.size)
        if gamma.size != expected:
            raise InputError(f"gamma has length {gamma.size}, expected {expected}")

    @classmethod
    def zeros(cls, spec: KernelSpec, covariates: Any) -> "RkhsCoefficients":
        ages = as_ages(covariates)
        return cls(np.zeros(spec.mixed_dimension(ages.size)), spec, ages)

    @property
    def n(self) -> int:
        return self.train_covariates.size

    def with_gamma(self, gamma: np.ndarray) -> "RkhsCoefficients":
        return RkhsCoefficients(gamma, self.spec, self.train_covariates)

    def theta_at_training(self, ops: MixedOperators) -> np.ndarray:
        """M gamma reshaped to (n, p); equals ``evaluate`` at the training ages."""
        return ops.theta(self.gamma)

    def evaluate(self, covariates: Any) -> np.ndarray:
        """
        Evaluates h_gamma at new covariates.

        Returns:
            np.ndarray: Parameter values, shape (m, p).
        """
        ages = as_ages(covariates)
        out = np.zeros((ages.size, self.spec.p))
        for l, (comp, cols) in enumerate(zip(self.spec.components, self.spec.slices(self.n))):
            coef = self.gamma[cols]
            if l in self.spec.dual:
                out[:, l] = comp.gram(ages, self.train_covariates) @ coef
            elif coef.size:
                out[:, l] = comp.features(ages) @ coef
        return out

    def to_dual(self) -> "RkhsCoefficients":
        """
        Equivalent coefficients in the fully dual parametrization.

        For a primal block, alpha_.l is the minimum-norm solution of
        sum_i phi_l(x_i) alpha_il = beta_l.
        """
        parts = []
        for l, (comp, cols) in enumerate(zip(self.spec.components, self.spec.slices(self.n))):
            coef = self.gamma[cols]
            if l in self.spec.dual:
                parts.append(coef)
            elif coef.size == 0:
                parts.append(np.zeros(self.n))
            else:
                Phi = comp.features(self.train_covariates)
                alpha, *_ = np.linalg.lstsq(Phi.T, coef, rcond=None)
                parts.append(alpha)
        gamma = np.concatenate(parts)
        return RkhsCoefficients(gamma, self.spec.fully_dual(), self.train_covariates)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma.tolist(),
            "kernel": self.spec.to_dict(),
            "train_ages": self.train_covariates.tolist(),
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "RkhsCoefficients":
        return cls(
            np.asarray(record["gamma"], dtype=float),
            KernelSpec.from_dict(record["kernel"]),
            np.asarray(record["train_ages"], dtype=float),
        )


def eval_rkhs_function(coeffs: RkhsCoefficients, x: Any) -> np.ndarray:
    """
    Evaluates the fitted function at one covariate record.

    Args:
        coeffs (RkhsCoefficients): Mixed-form coefficients.
        x: A single age or an (age, weight) record.

    Returns:
        np.ndarray: The p-vector theta = h_gamma(x).
    """
    arr = np.asarray(x, dtype=float).reshape(-1)
    return coeffs.evaluate(arr[:1])[0]


def rkhs_norm_sq(coeffs: RkhsCoefficients, ops: MixedOperators) -> float:
    """Squared RKHS norm gamma^T D gamma."""
    if ops.d != coeffs.gamma.size:
        raise InputError(f"Operator dimension {ops.d} does not match gamma ({coeffs.gamma.size})")
    return float(coeffs.gamma @ ops.Dmat @ coeffs.gamma)


def per_parameter(values: np.ndarray) -> np.ndarray:
    """Reorders an (n, p) array into the per-parameter stacking (theta_.1, ..., theta_.p)."""
    return np.asarray(values, dtype=float).T.reshape(-1)

