"""
K-fold cross-validation of the Tikhonov regularization parameter.

Folds split individuals, so all timepoints of an individual are held out together.
"""

import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.model_selection import KFold

from rkhs_gof.config import ALYLIN_ITERATIONS, CV_FOLDS, CV_GRID
from rkhs_gof.errors import FitFailedError, InputError, RkhsGofError
from rkhs_gof.estimators.parametric import fit_parametric
from rkhs_gof.estimators.results import COMBINED, NONPARAMETRIC, FitResult
from rkhs_gof.estimators.tikhonov import fit_combined, fit_nonparametric
from rkhs_gof.kernels.operators import KernelSpec
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.parallel import run_tasks
from rkhs_gof.pk.covariates import AFFINE_LINEAR, check_family_kind

logger = logging.getLogger("CV-CrossValidation")


def parse_estimator(estimator: Any) -> Tuple[str, Optional[str]]:
    """
    Normalizes "nonparametric", ("combined", family) or "combined:family".

    Returns:
        Tuple[str, Optional[str]]: Estimator name and, for the combined estimator, the
        parametric family.
    """
    if isinstance(estimator, str) and ":" in estimator:
        estimator = tuple(estimator.split(":", 1))
    if isinstance(estimator, (tuple, list)):
        if len(estimator) != 2 or estimator[0] != COMBINED:
            raise InputError(f"Unknown estimator {estimator!r}")
        return COMBINED, check_family_kind(estimator[1])
    if estimator == NONPARAMETRIC:
        return NONPARAMETRIC, None
    if estimator == COMBINED:
        raise InputError("The combined estimator needs a parametric family")
    raise InputError(f"Unknown estimator {estimator!r}")


def check_grid(grid: Sequence[float]) -> np.ndarray:
    values = np.asarray(grid, dtype=float).reshape(-1)
    if values.size == 0:
        raise InputError("The lambda grid is empty")
    if not (np.all(np.isfinite(values)) and np.all(values > 0)):
        raise InputError("Grid values must be positive and finite")
    if np.any(np.diff(values) <= 0):
        raise InputError("The lambda grid must be strictly increasing")
    return values


@dataclass
class CvResult:
    """
    Cross-validation curve and selected lambda.

    Attributes:
        grid (np.ndarray): Strictly increasing lambda values.
        fold_errors (np.ndarray): Held-out squared error per (fold, lambda); NaN marks a
            failed cell.
        mean_errors (np.ndarray): Fold-averaged error per lambda; NaN if disqualified.
        standard_errors (np.ndarray): Standard error of the fold average.
        disqualified (np.ndarray): True for lambdas with at least one failed cell.
        selected_lambda (float): Minimizer of ``mean_errors``; ties go to the larger lambda.
        seed (int): Fold assignment seed.
        folds (List[np.ndarray]): Held-out individual indices per fold.
        estimator (str): Estimator label.
    """

    grid: np.ndarray
    fold_errors: np.ndarray
    mean_errors: np.ndarray
    standard_errors: np.ndarray
    disqualified: np.ndarray
    selected_lambda: float
    seed: int
    folds: List[np.ndarray]
    estimator: str

    @property
    def k(self) -> int:
        return len(self.folds)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "lambda": self.grid,
                "mean_error": self.mean_errors,
                "se": self.standard_errors,
                "disqualified": self.disqualified,
                "selected": self.grid == self.selected_lambda,
            }
        )

    def to_record(self) -> dict:
        return {
            "estimator": self.estimator,
            "selected_lambda": float(self.selected_lambda),
            "seed": int(self.seed),
            "k": self.k,
            "grid": [float(v) for v in self.grid],
            "mean_errors": [float(v) for v in self.mean_errors],
        }


def _fold_start(
    train: Any, family_kind: str, opts: Optional[SolverOptions]
) -> Optional[FitResult]:
    """Parametric fit of a training set, shared by every lambda of the fold."""
    try:
        fit = fit_parametric(family_kind, train, None, opts)
    except RkhsGofError as exc:
        logger.warning(f"Parametric fit of a training fold failed: {exc}")
        return None
    return None if fit.failed else fit


def _cell(
    train: Any,
    held_out: Any,
    estimator: str,
    family_kind: str,
    kernel: KernelSpec,
    lam: float,
    niter: int,
    opts: Optional[SolverOptions],
    start: Optional[FitResult],
) -> float:
    """Held-out error sum_i ||y_i - G(f_hat(x_i), x_i)||^2, NaN on failure."""
    if start is None:
        return float("nan")
    try:
        if estimator == COMBINED:
            fit = fit_combined(
                train, family_kind, kernel, lam, niter=niter, opts=opts, parametric_fit=start
            )
        else:
            fit = fit_nonparametric(
                train, kernel, lam, family_kind, niter=niter, opts=opts, parametric_fit=start
            )
        if fit.failed:
            return float("nan")
        prediction = fit.predictions(held_out.model(), held_out.covariates)
    except RkhsGofError as exc:
        logger.debug(f"CV cell lambda={lam:.3g} failed: {exc}")
        return float("nan")
    error = float(np.sum((held_out.y - prediction) ** 2))
    return error if np.isfinite(error) else float("nan")


def cross_validate_lambda(
    dataset: Any,
    estimator: Any = NONPARAMETRIC,
    kernel: Optional[KernelSpec] = None,
    grid: Sequence[float] = CV_GRID,
    k: int = CV_FOLDS,
    seed: int = 0,
    opts: Optional[SolverOptions] = None,
    jobs: int = 1,
    niter: int = ALYLIN_ITERATIONS,
    init_family_kind: str = AFFINE_LINEAR,
) -> CvResult:
    """
    Selects lambda by k-fold cross-validation over individuals.

    Args:
        dataset (Dataset): Observations and covariates.
        estimator: "nonparametric", or ("combined", family) for the combined estimator.
        kernel (Optional[KernelSpec]): Defaults to the estimator's preset kernel.
        grid (Sequence[float]): Candidate lambdas, strictly increasing.
        k (int): Number of folds.
        seed (int): Seed of the fold shuffle.
        opts (Optional[SolverOptions]): Solver options.
        jobs (int): Worker count; (fold, lambda) cells run in parallel.
        niter (int): Maximum AlyLin iterations.
        init_family_kind (str): Step-1 family of the nonparametric estimator.

    Returns:
        CvResult: The CV curve and the selected lambda.

    Raises:
        InputError: If k < 2, n < k, or the grid is empty or not increasing.
        FitFailedError: If every lambda is disqualified.
    """
    name, family_kind = parse_estimator(estimator)
    family_kind = family_kind or check_family_kind(init_family_kind)
    grid = check_grid(grid)
    if k < 2:
        raise InputError(f"Cross-validation needs at least 2 folds, got {k}")
    if dataset.n < k:
        raise InputError(f"{dataset.n} individuals cannot be split into {k} folds")
    if kernel is None:
        kernel = KernelSpec.combined() if name == COMBINED else KernelSpec.nonparametric()
    label = name if name == NONPARAMETRIC else f"{name}:{family_kind}"

    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    splits = [
        (dataset.subset(train), dataset.subset(test), test)
        for train, test in splitter.split(dataset.ages)
    ]
    logger.info(f"Cross-validating {label} over {grid.size} lambdas and {k} folds")

    starts = run_tasks(_fold_start, [(train, family_kind, opts) for train, _, _ in splits], jobs)
    tasks = [
        (train, held_out, name, family_kind, kernel, lam, niter, opts, start)
        for (train, held_out, _), start in zip(splits, starts)
        for lam in grid
    ]
    fold_errors = np.asarray(run_tasks(_cell, tasks, jobs), dtype=float).reshape(k, grid.size)

    disqualified = np.any(np.isnan(fold_errors), axis=0)
    for lam in grid[disqualified]:
        logger.warning(f"lambda={lam:.3g} disqualified: a fold fit failed")
    mean_errors = np.where(disqualified, np.nan, fold_errors.mean(axis=0))
    standard_errors = np.where(disqualified, np.nan, fold_errors.std(axis=0, ddof=1) / np.sqrt(k))
    if np.all(disqualified):
        raise FitFailedError(f"Every lambda of the grid has a failed fold fit ({label})")

    # Ties go to the larger lambda: search from the right end of the grid.
    reversed_errors = np.where(disqualified, np.inf, mean_errors)[::-1]
    selected = float(grid[grid.size - 1 - int(np.argmin(reversed_errors))])
    logger.info(f"Selected lambda={selected:.3g} for {label}")
    return CvResult(
        grid=grid,
        fold_errors=fold_errors,
        mean_errors=mean_errors,
        standard_errors=standard_errors,
        disqualified=disqualified,
        selected_lambda=selected,
        seed=int(seed),
        folds=[np.asarray(te) for _, _, te in splits],
        estimator=label,
    )
