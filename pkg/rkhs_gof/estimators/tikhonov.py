"""
Tikhonov estimators of the covariate-to-parameter function.

fit_nonparametric runs ParDir-AlyLin-Nonlin: a parametric least squares fit whose
values serve as targets of a direct RKHS problem (ParDir), repeated closed-form solves
of the linearized problem (AlyLin), and quasi-Newton on the full functional (Nonlin).
fit_combined runs Par-AlyLin-Nonlin with the parametric part held fixed and the RKHS
part started at zero. fit_smoothed_parametric applies the nonparametric algorithm to
noise-free data generated by a fitted parametric model.
"""

import logging
import time
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from rkhs_gof.config import (
    ALYLIN_ITERATIONS,
    ALYLIN_RELATIVE_TOLERANCE,
    DEFAULT_LAMBDA_COMBINED,
    DEFAULT_LAMBDA_NONPARAMETRIC,
)
from rkhs_gof.errors import ContractError, InputError, RkhsGofError
from rkhs_gof.estimators.objective import TikhonovObjective
from rkhs_gof.estimators.parametric import fit_parametric
from rkhs_gof.estimators.results import (
    COMBINED,
    NONPARAMETRIC,
    SMOOTHED,
    FitResult,
    StageReport,
)
from rkhs_gof.inverse.linear import direct_problem, linearize, solve_linear_tikhonov
from rkhs_gof.kernels.operators import (
    KernelSpec,
    MixedOperators,
    RkhsCoefficients,
    assemble_mixed_operators,
)
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.optimize.quasi_newton import quasi_newton
from rkhs_gof.pk.covariates import AFFINE_LINEAR, ParametricFamily

logger = logging.getLogger("Estimators-Tikhonov")

ALYLIN = "alylin"
NONLIN = "nonlin"
ALL_STAGES: Tuple[str, ...] = (ALYLIN, NONLIN)


def _check_inputs(dataset: Any, kernel: KernelSpec, lam: float, stages: Sequence[str]) -> None:
    if dataset is None or getattr(dataset, "n", 0) == 0:
        raise InputError("Tikhonov estimation needs at least one individual")
    if not lam > 0:
        raise InputError(f"lambda must be positive, got {lam}")
    if kernel.p != dataset.model().p:
        raise InputError(f"Kernel has {kernel.p} components, the model {dataset.model().p}")
    unknown = set(stages) - set(ALL_STAGES)
    if unknown:
        raise InputError(f"Unknown stages {sorted(unknown)}, expected a subset of {ALL_STAGES}")


def _alylin(
    objective: TikhonovObjective,
    dataset: Any,
    start: RkhsCoefficients,
    niter: int,
    stages: List[StageReport],
) -> Tuple[RkhsCoefficients, bool]:
    """
    Repeated linearize-and-solve; returns the iterate with the smallest objective.

    The starting function counts as an iterate, so the output never has a larger
    objective than the start.
    """
    clock = time.perf_counter()
    best, best_value = start, objective.value(start.gamma)
    current, previous = start, best_value
    failed, message, done = False, "iteration budget exhausted", 0
    for done in range(1, niter + 1):
        try:
            problem = linearize(
                objective.model, objective.offset, current, dataset, objective.ops, objective.lam
            )
            candidate = solve_linear_tikhonov(problem)
        except RkhsGofError as exc:
            failed, message = True, f"linearization failed: {exc}"
            done -= 1
            break
        value = objective.value(candidate.gamma)
        if not np.isfinite(value):
            message = "iterate left the model domain"
            break
        if value < best_value:
            best, best_value = candidate, value
        logger.debug(f"AlyLin iteration {done}: Q={value:.6e}")
        if abs(value - previous) < ALYLIN_RELATIVE_TOLERANCE * max(abs(previous), 1e-300):
            message = "relative objective change below tolerance"
            break
        current, previous = candidate, value
    stages.append(
        StageReport(
            name=ALYLIN,
            objective=best_value,
            elapsed=time.perf_counter() - clock,
            converged=not failed,
            iterations=done,
            message=message,
        )
    )
    return best, failed


def _nonlin(
    objective: TikhonovObjective,
    start: RkhsCoefficients,
    opts: Optional[SolverOptions],
    stages: List[StageReport],
) -> Tuple[RkhsCoefficients, bool]:
    if not np.isfinite(objective.value(start.gamma)):
        stages.append(StageReport(NONLIN, float("inf"), 0.0, False, 0, "start outside domain"))
        return start, True
    report = quasi_newton(objective.value, objective.gradient, start.gamma, opts)
    stages.append(StageReport.from_solver(NONLIN, report))
    return start.with_gamma(report.x), not report.converged


def _refine(
    objective: TikhonovObjective,
    dataset: Any,
    start: RkhsCoefficients,
    niter: int,
    opts: Optional[SolverOptions],
    stages: Sequence[str],
    log: List[StageReport],
) -> Tuple[RkhsCoefficients, bool]:
    """Runs the requested AlyLin and Nonlin stages from ``start``."""
    coeffs, degraded = start, False
    if ALYLIN in stages and niter > 0:
        coeffs, failed = _alylin(objective, dataset, coeffs, niter, log)
        degraded |= failed
    if NONLIN in stages:
        coeffs, not_converged = _nonlin(objective, coeffs, opts, log)
        degraded |= not_converged
    return coeffs, degraded


def _direct_stage(
    ops: MixedOperators, targets: np.ndarray, lam: float, objective: TikhonovObjective
) -> Tuple[RkhsCoefficients, StageReport]:
    clock = time.perf_counter()
    coeffs = solve_linear_tikhonov(direct_problem(ops, targets, lam))
    value = objective.value(coeffs.gamma)
    return coeffs, StageReport("dir", value, time.perf_counter() - clock, True, 1, "closed form")


def _finish(
    method: str,
    objective: TikhonovObjective,
    coeffs: RkhsCoefficients,
    log: List[StageReport],
    degraded: bool,
    dataset: Any,
    family: Optional[ParametricFamily] = None,
    initial_family: Optional[ParametricFamily] = None,
) -> FitResult:
    value = objective.value(coeffs.gamma)
    if degraded or not np.isfinite(value):
        logger.warning(
            f"{method} fit degraded (lambda={objective.lam:.3g}): "
            + "; ".join(f"{s.name}: {s.message}" for s in log if not s.converged)
        )
    return FitResult(
        method=method,
        family=family,
        coefficients=coeffs,
        lam=objective.lam,
        objective=value,
        mse=objective.misfit(coeffs.gamma),
        stages=log,
        seed=getattr(dataset, "seed", None),
        degraded=degraded or not np.isfinite(value),
        initial_family=initial_family,
    )


def _algorithm1(
    method: str,
    dataset: Any,
    kernel: KernelSpec,
    lam: float,
    targets: Optional[np.ndarray],
    gamma0: Optional[np.ndarray],
    niter: int,
    opts: Optional[SolverOptions],
    stages: Sequence[str],
    log: List[StageReport],
    initial_family: Optional[ParametricFamily],
) -> FitResult:
    ops = assemble_mixed_operators(kernel, dataset.ages)
    objective = TikhonovObjective(dataset.model(), dataset, ops, lam)
    if gamma0 is not None:
        start = RkhsCoefficients(gamma0, kernel, dataset.ages)
    else:
        start, stage = _direct_stage(ops, targets, lam, objective)
        log.append(stage)
    coeffs, degraded = _refine(objective, dataset, start, niter, opts, stages, log)
    return _finish(method, objective, coeffs, log, degraded, dataset, None, initial_family)


def fit_nonparametric(
    dataset: Any,
    kernel: Optional[KernelSpec] = None,
    lam: float = DEFAULT_LAMBDA_NONPARAMETRIC,
    init_family_kind: str = AFFINE_LINEAR,
    tau0: Optional[Sequence[float]] = None,
    niter: int = ALYLIN_ITERATIONS,
    opts: Optional[SolverOptions] = None,
    stages: Sequence[str] = ALL_STAGES,
    gamma0: Optional[np.ndarray] = None,
    parametric_fit: Optional[FitResult] = None,
) -> FitResult:
    """
    Tikhonov estimate f_hat = argmin_h (1/n) sum_i ||y_i - G(h(x_i), x_i)||^2 + lam ||h||^2.

    Args:
        dataset (Dataset): Observations and covariates.
        kernel (Optional[KernelSpec]): Defaults to the Gaussian-plus-constants kernel.
        lam (float): Regularization parameter.
        init_family_kind (str): Parametric family of step 1.
        tau0 (Optional[Sequence[float]]): Starting point of the step-1 fit.
        niter (int): Maximum AlyLin iterations.
        opts (Optional[SolverOptions]): Options for both Levenberg-Marquardt and quasi-Newton.
        stages (Sequence[str]): Subset of ("alylin", "nonlin") to run after ParDir.
        gamma0 (Optional[np.ndarray]): Skip ParDir and start from these coefficients.
        parametric_fit (Optional[FitResult]): Reuse an existing step-1 fit of
            ``init_family_kind`` instead of refitting.

    Returns:
        FitResult: RKHS coefficients with per-stage diagnostics.
    """
    kernel = kernel or KernelSpec.nonparametric()
    _check_inputs(dataset, kernel, lam, stages)
    log: List[StageReport] = []
    targets, initial_family, par_degraded = None, None, False
    if gamma0 is None:
        parametric = parametric_fit
        if parametric is None:
            parametric = fit_parametric(init_family_kind, dataset, tau0, opts)
        elif parametric.family is None or parametric.family.kind != init_family_kind:
            raise ContractError(f"The supplied parametric fit is not a {init_family_kind} fit")
        log.extend(parametric.stages)
        initial_family, par_degraded = parametric.family, parametric.degraded
        targets = initial_family.theta(dataset.ages)
    result = _algorithm1(
        NONPARAMETRIC,
        dataset,
        kernel,
        lam,
        targets,
        gamma0,
        niter,
        opts,
        stages,
        log,
        initial_family,
    )
    result.degraded |= par_degraded
    return result


def fit_smoothed_parametric(
    dataset: Any,
    tau_hat: Sequence[float],
    family_kind: str,
    kernel: Optional[KernelSpec] = None,
    lam: float = DEFAULT_LAMBDA_NONPARAMETRIC,
    niter: int = ALYLIN_ITERATIONS,
    opts: Optional[SolverOptions] = None,
    stages: Sequence[str] = ALL_STAGES,
) -> FitResult:
    """
    Smoothed parametric estimator: the nonparametric estimator applied to artificial
    data y~_i = G(f_tau_hat(x_i), x_i), with f_tau_hat itself as the step-1 estimate.

    Args:
        dataset (Dataset): Supplies the covariates and design; its observations are not used.
        tau_hat (Sequence[float]): Fitted parameters of the null family.
        family_kind (str): Null family.

    Returns:
        FitResult: RKHS coefficients; objective and misfit refer to the artificial data.
    """
    kernel = kernel or KernelSpec.nonparametric()
    family = ParametricFamily(family_kind, tuple(tau_hat))
    targets = family.theta(dataset.ages)
    artificial = dataset.with_observations(
        dataset.model().predict(targets, dataset.covariates), artificial=True
    )
    _check_inputs(artificial, kernel, lam, stages)
    return _algorithm1(
        SMOOTHED, artificial, kernel, lam, targets, None, niter, opts, stages, [], family
    )


def fit_combined(
    dataset: Any,
    family_kind: str,
    kernel: Optional[KernelSpec] = None,
    lam: float = DEFAULT_LAMBDA_COMBINED,
    tau0: Optional[Sequence[float]] = None,
    niter: int = ALYLIN_ITERATIONS,
    opts: Optional[SolverOptions] = None,
    stages: Sequence[str] = ALL_STAGES,
    parametric_fit: Optional[FitResult] = None,
) -> FitResult:
    """
    Combined estimate f~ = f_tau_hat + h_hat with tau_hat from least squares held fixed.

    Args:
        dataset (Dataset): Observations and covariates.
        family_kind (str): Parametric family of the fixed part.
        kernel (Optional[KernelSpec]): Defaults to the Gaussian-clearance-only kernel.
        lam (float): Regularization parameter.
        tau0 (Optional[Sequence[float]]): Starting point of the parametric fit.
        niter (int): Maximum AlyLin iterations.
        opts (Optional[SolverOptions]): Solver options.
        stages (Sequence[str]): Subset of ("alylin", "nonlin") to run after Par.
        parametric_fit (Optional[FitResult]): Reuse an existing least squares fit of
            ``family_kind`` instead of refitting.

    Returns:
        FitResult: Both the parametric family and the RKHS coefficients.
    """
    kernel = kernel or KernelSpec.combined()
    _check_inputs(dataset, kernel, lam, stages)
    if parametric_fit is None:
        parametric_fit = fit_parametric(family_kind, dataset, tau0, opts)
    elif parametric_fit.family is None or parametric_fit.family.kind != family_kind:
        raise ContractError(f"The supplied parametric fit is not a {family_kind} fit")
    family = parametric_fit.family
    log: List[StageReport] = list(parametric_fit.stages)

    ops = assemble_mixed_operators(kernel, dataset.ages)
    objective = TikhonovObjective(
        dataset.model(), dataset, ops, lam, offset=family.theta(dataset.ages)
    )
    start = RkhsCoefficients.zeros(kernel, dataset.ages)
    coeffs, degraded = _refine(objective, dataset, start, niter, opts, stages, log)
    return _finish(
        COMBINED, objective, coeffs, log, degraded or parametric_fit.degraded, dataset, family
    )
