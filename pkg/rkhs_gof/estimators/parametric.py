"""
Parametric least squares for the covariate model families.
"""

import logging
from typing import Any, Optional, Sequence

import numpy as np

from rkhs_gof.config import DEFAULT_TAU0
from rkhs_gof.errors import DomainError, InputError
from rkhs_gof.estimators.results import PARAMETRIC, FitResult, StageReport
from rkhs_gof.optimize.levenberg_marquardt import levenberg_marquardt
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.pk.covariates import ParametricFamily, check_family_kind, tau_is_admissible

logger = logging.getLogger("Estimators-Parametric")


def fit_parametric(
    family_kind: str,
    dataset: Any,
    tau0: Optional[Sequence[float]] = None,
    opts: Optional[SolverOptions] = None,
) -> FitResult:
    """
    Least squares estimate tau_hat = argmin sum_i ||y_i - G(f_tau(x_i), x_i)||^2.

    Args:
        family_kind (str): Parametric family to fit.
        dataset (Dataset): Observations and covariates.
        tau0 (Optional[Sequence[float]]): Starting point in mL and mL/day; defaults to
            DEFAULT_TAU0 of the family.
        opts (Optional[SolverOptions]): Levenberg-Marquardt options.

    Returns:
        FitResult: Parametric fit; ``degraded`` is set if the solver did not converge.
    """
    kind = check_family_kind(family_kind)
    if dataset is None or getattr(dataset, "n", 0) == 0:
        raise InputError("Parametric fitting needs at least one individual")
    tau0 = np.asarray(DEFAULT_TAU0[kind] if tau0 is None else tau0, dtype=float)
    ages, covariates, y = dataset.ages, dataset.covariates, dataset.y
    model = dataset.model()
    n, q = y.shape
    if not tau_is_admissible(kind, tau0, ages):
        raise InputError(f"Starting point {tau0.tolist()} is outside the {kind} domain")

    def residuals(tau: np.ndarray) -> np.ndarray:
        if not tau_is_admissible(kind, tau, ages):
            return np.full(n * q, np.inf)
        try:
            prediction = model.predict(ParametricFamily(kind, tuple(tau)).theta(ages), covariates)
        except DomainError:
            return np.full(n * q, np.inf)
        return (prediction - y).reshape(-1)

    def jacobian(tau: np.ndarray) -> np.ndarray:
        family = ParametricFamily(kind, tuple(tau))
        J_G = model.jacobian(family.theta(ages), covariates)
        J_tau = family.tau_jacobian(ages)
        return np.einsum("iqp,ipk->iqk", J_G, J_tau).reshape(n * q, -1)

    report = levenberg_marquardt(residuals, tau0, opts, jacobian=jacobian)
    family = ParametricFamily(kind, tuple(report.x))
    stage = StageReport.from_solver("par", report)
    stage.objective = report.fun / n
    if not report.converged:
        logger.warning(f"Parametric {kind} fit did not converge: {report.message}")
    return FitResult(
        method=PARAMETRIC,
        family=family,
        objective=report.fun / n,
        mse=report.fun / (n * q),
        stages=[stage],
        seed=getattr(dataset, "seed", None),
        degraded=not report.converged,
    )
