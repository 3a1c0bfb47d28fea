"""
Goodness-of-fit test statistics and the estimation pipeline that feeds them.

Observation-space statistics compare model predictions G(f(x_i), x_i) of two fits,
parameter-space statistics compare the fitted values f(x_i) directly:

    T1, S1      parametric fit against the nonparametric fit
    T1star, S1star  smoothed parametric fit against the nonparametric fit
    T2, S2      parametric fit against the combined fit
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from rkhs_gof.config import (
    ALYLIN_ITERATIONS,
    DEFAULT_LAMBDA_COMBINED,
    DEFAULT_LAMBDA_NONPARAMETRIC,
)
from rkhs_gof.errors import ContractError, FitFailedError, InputError, RkhsGofError
from rkhs_gof.estimators.parametric import fit_parametric
from rkhs_gof.estimators.results import (
    COMBINED,
    NONPARAMETRIC,
    PARAMETRIC,
    SMOOTHED,
    FitResult,
)
from rkhs_gof.estimators.tikhonov import fit_combined, fit_nonparametric, fit_smoothed_parametric
from rkhs_gof.kernels.operators import KernelSpec
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.pk.covariates import check_family_kind

logger = logging.getLogger("GOF-Statistics")


class StatisticKind(str, Enum):
    T1 = "T1"
    T1STAR = "T1star"
    T2 = "T2"
    S1 = "S1"
    S1STAR = "S1star"
    S2 = "S2"

    @property
    def observation_space(self) -> bool:
        return self.value.startswith("T")

    @property
    def estimator(self) -> str:
        """The Tikhonov estimator whose kernel and lambda the statistic depends on."""
        return COMBINED if self in (StatisticKind.T2, StatisticKind.S2) else NONPARAMETRIC


REQUIRED_FITS: Dict[StatisticKind, Tuple[str, str]] = {
    StatisticKind.T1: (PARAMETRIC, NONPARAMETRIC),
    StatisticKind.S1: (PARAMETRIC, NONPARAMETRIC),
    StatisticKind.T1STAR: (SMOOTHED, NONPARAMETRIC),
    StatisticKind.S1STAR: (SMOOTHED, NONPARAMETRIC),
    StatisticKind.T2: (PARAMETRIC, COMBINED),
    StatisticKind.S2: (PARAMETRIC, COMBINED),
}


def parse_kinds(kinds: Any) -> List[StatisticKind]:
    """
    Accepts a kind, a comma-separated string or an iterable of names and kinds.

    Raises:
        InputError: For unknown names or an empty selection.
    """
    if isinstance(kinds, (str, StatisticKind)):
        kinds = [k for k in str(getattr(kinds, "value", kinds)).split(",") if k.strip()]
    parsed: List[StatisticKind] = []
    for kind in kinds:
        try:
            value = StatisticKind(getattr(kind, "value", str(kind).strip()))
        except ValueError:
            valid = ", ".join(k.value for k in StatisticKind)
            raise InputError(f"Unknown statistic '{kind}', expected one of {valid}") from None
        if value not in parsed:
            parsed.append(value)
    if not parsed:
        raise InputError("At least one statistic is required")
    return parsed


def compute_statistic(
    kind: Any,
    dataset: Any,
    model: Any = None,
    parametric_fit: Optional[FitResult] = None,
    nonparametric_fit: Optional[FitResult] = None,
    combined_fit: Optional[FitResult] = None,
    smoothed_fit: Optional[FitResult] = None,
) -> float:
    """
    Sum over individuals of the squared Euclidean distance between two fits.

    Args:
        kind (StatisticKind): Which statistic.
        dataset (Dataset): Supplies the covariates x_i.
        model (Optional[MechanisticModel]): G; defaults to the dataset's model.
        parametric_fit, nonparametric_fit, combined_fit, smoothed_fit (Optional[FitResult]):
            The fits; only those the kind compares are required.

    Returns:
        float: The nonnegative statistic.

    Raises:
        ContractError: If a fit the kind needs is missing.
    """
    kind = parse_kinds(kind)[0]
    fits = {
        PARAMETRIC: parametric_fit,
        NONPARAMETRIC: nonparametric_fit,
        COMBINED: combined_fit,
        SMOOTHED: smoothed_fit,
    }
    first, second = (fits[method] for method in REQUIRED_FITS[kind])
    if first is None or second is None:
        missing = [m for m in REQUIRED_FITS[kind] if fits[m] is None]
        raise ContractError(f"{kind.value} needs the {' and '.join(missing)} fit")

    covariates = dataset.covariates
    if kind.observation_space:
        model = model or dataset.model()
        diff = first.predictions(model, covariates) - second.predictions(model, covariates)
    else:
        diff = first.parameters(covariates) - second.parameters(covariates)
    return float(np.sum(diff**2))


@dataclass(frozen=True)
class GofSettings:
    """
    Estimator configuration shared by the observed statistic and every Monte Carlo replicate.

    Attributes:
        kernel_nonparametric (KernelSpec): Kernel of the nonparametric and smoothed fits.
        kernel_combined (KernelSpec): Kernel of the RKHS part of the combined fit.
        lam_nonparametric (float): Regularization of the nonparametric and smoothed fits.
        lam_combined (float): Regularization of the combined fit.
        niter (int): Maximum AlyLin iterations.
        opts (SolverOptions): Options of every solver in the pipeline.
        tau0 (Dict[str, Tuple[float, ...]]): Parametric starting points per family;
            families not listed start from their defaults.
    """

    kernel_nonparametric: KernelSpec = field(default_factory=KernelSpec.nonparametric)
    kernel_combined: KernelSpec = field(default_factory=KernelSpec.combined)
    lam_nonparametric: float = DEFAULT_LAMBDA_NONPARAMETRIC
    lam_combined: float = DEFAULT_LAMBDA_COMBINED
    niter: int = ALYLIN_ITERATIONS
    opts: SolverOptions = field(default_factory=SolverOptions)
    tau0: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (self.lam_nonparametric > 0 and self.lam_combined > 0):
            raise InputError("Regularization parameters must be positive")
        if self.niter < 0:
            raise InputError("niter must be nonnegative")

    def lam(self, estimator: str) -> float:
        return self.lam_combined if estimator == COMBINED else self.lam_nonparametric

    def start(self, family_kind: str) -> Optional[Tuple[float, ...]]:
        return self.tau0.get(family_kind)

    def with_estimator(
        self, estimator: str, kernel: Optional[KernelSpec] = None, lam: Optional[float] = None
    ) -> "GofSettings":
        """Overrides the kernel and lambda of one estimator."""
        if estimator == COMBINED:
            return replace(
                self,
                kernel_combined=kernel or self.kernel_combined,
                lam_combined=self.lam_combined if lam is None else float(lam),
            )
        if estimator != NONPARAMETRIC:
            raise InputError(f"Unknown estimator '{estimator}'")
        return replace(
            self,
            kernel_nonparametric=kernel or self.kernel_nonparametric,
            lam_nonparametric=self.lam_nonparametric if lam is None else float(lam),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel_nonparametric": self.kernel_nonparametric.to_dict(),
            "kernel_combined": self.kernel_combined.to_dict(),
            "lam_nonparametric": self.lam_nonparametric,
            "lam_combined": self.lam_combined,
            "niter": self.niter,
            "opts": self.opts.to_dict(),
            "tau0": {kind: list(tau) for kind, tau in self.tau0.items()},
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "GofSettings":
        defaults = cls()
        kernel_np = record.get("kernel_nonparametric")
        kernel_c = record.get("kernel_combined")
        return cls(
            kernel_nonparametric=(
                KernelSpec.from_dict(kernel_np) if kernel_np else defaults.kernel_nonparametric
            ),
            kernel_combined=(
                KernelSpec.from_dict(kernel_c) if kernel_c else defaults.kernel_combined
            ),
            lam_nonparametric=float(record.get("lam_nonparametric", defaults.lam_nonparametric)),
            lam_combined=float(record.get("lam_combined", defaults.lam_combined)),
            niter=int(record.get("niter", defaults.niter)),
            opts=SolverOptions.from_dict(record.get("opts", {})),
            tau0={kind: tuple(tau) for kind, tau in record.get("tau0", {}).items()},
        )


@dataclass
class PipelineResult:
    """Statistics of one dataset together with the fits they were computed from."""

    statistics: Dict[StatisticKind, float]
    fits: Dict[str, FitResult]

    @property
    def parametric(self) -> FitResult:
        return self.fits[PARAMETRIC]

    @property
    def degraded(self) -> bool:
        return any(fit.degraded for fit in self.fits.values())


def required_methods(kinds: Iterable[StatisticKind]) -> List[str]:
    """Estimators needed by ``kinds``, parametric first."""
    methods = [PARAMETRIC]
    for kind in kinds:
        for method in REQUIRED_FITS[kind]:
            if method not in methods:
                methods.append(method)
    return methods


def _checked(method: str, fit: FitResult) -> FitResult:
    if fit.failed:
        raise FitFailedError(f"The {method} fit ended with a non-finite objective")
    return fit


def run_pipeline(
    kinds: Sequence[Any],
    dataset: Any,
    family_kind: str,
    settings: Optional[GofSettings] = None,
    tau0: Optional[Sequence[float]] = None,
) -> PipelineResult:
    """
    Fits the null family and exactly the estimators the statistics need.

    The parametric least squares fit of the null family is computed once and reused
    as step 1 of the nonparametric estimator, as the fixed part of the combined
    estimator and as the generator of the smoothed estimator's artificial data.

    Args:
        kinds (Sequence[StatisticKind]): Statistics to compute.
        dataset (Dataset): Observations and covariates.
        family_kind (str): Null family.
        settings (Optional[GofSettings]): Estimator configuration.
        tau0 (Optional[Sequence[float]]): Overrides the parametric starting point.

    Returns:
        PipelineResult: One value per requested kind.

    Raises:
        FitFailedError: If any fit raises or ends with a non-finite objective.
    """
    kinds = parse_kinds(kinds)
    family_kind = check_family_kind(family_kind)
    settings = settings or GofSettings()
    start = settings.start(family_kind) if tau0 is None else tau0
    fits: Dict[str, FitResult] = {}

    method = PARAMETRIC
    try:
        parametric = _checked(
            PARAMETRIC, fit_parametric(family_kind, dataset, start, settings.opts)
        )
        fits[PARAMETRIC] = parametric
        for method in required_methods(kinds)[1:]:
            if method == NONPARAMETRIC:
                fit = fit_nonparametric(
                    dataset,
                    settings.kernel_nonparametric,
                    settings.lam_nonparametric,
                    family_kind,
                    niter=settings.niter,
                    opts=settings.opts,
                    parametric_fit=parametric,
                )
            elif method == COMBINED:
                fit = fit_combined(
                    dataset,
                    family_kind,
                    settings.kernel_combined,
                    settings.lam_combined,
                    niter=settings.niter,
                    opts=settings.opts,
                    parametric_fit=parametric,
                )
            else:
                fit = fit_smoothed_parametric(
                    dataset,
                    parametric.family.vector,
                    family_kind,
                    settings.kernel_nonparametric,
                    settings.lam_nonparametric,
                    settings.niter,
                    settings.opts,
                )
            fits[method] = _checked(method, fit)
    except FitFailedError:
        raise
    except RkhsGofError as exc:
        raise FitFailedError(f"The {method} fit failed: {exc}") from exc

    statistics = {
        kind: compute_statistic(
            kind,
            dataset,
            parametric_fit=fits.get(PARAMETRIC),
            nonparametric_fit=fits.get(NONPARAMETRIC),
            combined_fit=fits.get(COMBINED),
            smoothed_fit=fits.get(SMOOTHED),
        )
        for kind in kinds
    }
    logger.debug(
        "Statistics: " + ", ".join(f"{k.value}={v:.4g}" for k, v in statistics.items())
    )
    return PipelineResult(statistics=statistics, fits=fits)
