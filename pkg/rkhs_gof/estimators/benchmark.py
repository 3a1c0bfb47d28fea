"""
Runtime and accuracy benchmark of the Tikhonov estimation algorithms.

Nonparametric problem: quasi-Newton and simulated annealing from random coefficients,
against ParDir-AlyLin-Nonlin and its ParDir-AlyLin and ParDir-Nonlin variants.
Combined problem: Par-AlyLin-Nonlin, Par-AlyLin and Par-Nonlin.
"""

import logging
import time
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from rkhs_gof.config import (
    BENCH_DATASETS,
    BENCH_MSE_FACTOR,
    DEFAULT_LAMBDA_COMBINED,
    DEFAULT_LAMBDA_NONPARAMETRIC,
    ORDER_OF_MAGNITUDE_TAU,
)
from rkhs_gof.errors import InputError, RkhsGofError
from rkhs_gof.estimators.objective import TikhonovObjective
from rkhs_gof.estimators.tikhonov import (
    ALL_STAGES,
    ALYLIN,
    NONLIN,
    fit_combined,
    fit_nonparametric,
)
from rkhs_gof.kernels.operators import KernelSpec, assemble_mixed_operators
from rkhs_gof.optimize.annealing import simulated_annealing
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.parallel import STREAM_BENCHMARK, derived_seed, run_tasks, task_rng
from rkhs_gof.pk.covariates import AFFINE_LINEAR, ParametricFamily
from rkhs_gof.pk.scenarios import ScenarioSpec, simulate_dataset

logger = logging.getLogger("Estimators-Benchmark")

NONPARAMETRIC_ALGORITHMS = (
    "quasi_newton",
    "simulated_annealing",
    "pardir_alylin_nonlin",
    "pardir_alylin",
    "pardir_nonlin",
)
COMBINED_ALGORITHMS = ("par_alylin_nonlin", "par_alylin", "par_nonlin")

_STAGES = {
    "pardir_alylin_nonlin": ALL_STAGES,
    "pardir_alylin": (ALYLIN,),
    "pardir_nonlin": (NONLIN,),
    "par_alylin_nonlin": ALL_STAGES,
    "par_alylin": (ALYLIN,),
    "par_nonlin": (NONLIN,),
}


def _annealing_fit(dataset, kernel, lam, gamma0, opts: SolverOptions):
    ops = assemble_mixed_operators(kernel, dataset.ages)
    objective = TikhonovObjective(dataset.model(), dataset, ops, lam)
    report = simulated_annealing(objective.value, gamma0, opts)
    return report.fun, objective.misfit(report.x), not report.converged


def _run_algorithm(
    algorithm: str,
    dataset: Any,
    lam: float,
    gamma0: np.ndarray,
    tau0: np.ndarray,
    opts: SolverOptions,
    annealing_seed: int,
):
    """Returns (objective, mse, degraded) for one algorithm on one dataset."""
    if algorithm in COMBINED_ALGORITHMS:
        fit = fit_combined(
            dataset, AFFINE_LINEAR, lam=lam, tau0=tau0, opts=opts, stages=_STAGES[algorithm]
        )
        return fit.objective, fit.mse, fit.degraded
    kernel = KernelSpec.nonparametric()
    if algorithm == "simulated_annealing":
        return _annealing_fit(dataset, kernel, lam, gamma0, opts.with_seed(annealing_seed))
    if algorithm == "quasi_newton":
        fit = fit_nonparametric(dataset, kernel, lam, gamma0=gamma0, opts=opts, stages=(NONLIN,))
    else:
        fit = fit_nonparametric(
            dataset, kernel, lam, AFFINE_LINEAR, tau0, opts=opts, stages=_STAGES[algorithm]
        )
    return fit.objective, fit.mse, fit.degraded


def _benchmark_dataset(
    scenario: ScenarioSpec,
    truth: ParametricFamily,
    algorithms: Sequence[str],
    lam_nonparametric: float,
    lam_combined: float,
    opts: SolverOptions,
    master_seed: int,
    index: int,
) -> List[Dict[str, Any]]:
    seed = derived_seed(master_seed, STREAM_BENCHMARK, index)
    dataset = simulate_dataset(scenario, truth, seed)
    rng = task_rng(master_seed, STREAM_BENCHMARK, index)
    d = KernelSpec.nonparametric().mixed_dimension(dataset.n)
    # Lognormal starts with log-variance 1: around 1 for coefficients, around
    # order-of-magnitude values for the affine family.
    gamma0 = np.exp(rng.standard_normal(d))
    tau0 = np.asarray(ORDER_OF_MAGNITUDE_TAU[AFFINE_LINEAR]) * np.exp(rng.standard_normal(5))
    annealing_seed = derived_seed(master_seed, STREAM_BENCHMARK, index, 1)

    rows = []
    sigma2 = scenario.sigma**2
    for algorithm in algorithms:
        lam = lam_combined if algorithm in COMBINED_ALGORITHMS else lam_nonparametric
        clock = time.perf_counter()
        try:
            objective, mse, degraded = _run_algorithm(
                algorithm, dataset, lam, gamma0, tau0, opts, annealing_seed
            )
            message = ""
        except RkhsGofError as exc:
            objective, mse, degraded, message = float("inf"), float("inf"), True, str(exc)
        runtime = time.perf_counter() - clock
        rows.append(
            {
                "algorithm": algorithm,
                "scenario": scenario.name,
                "dataset": index,
                "seed": seed,
                "runtime_s": runtime,
                "mse": mse,
                "objective": objective,
                "degraded": degraded,
                "sigma2": sigma2,
                "success": bool(np.isfinite(mse) and mse <= BENCH_MSE_FACTOR * sigma2),
                "message": message,
            }
        )
        logger.debug(f"Benchmark {algorithm} dataset {index}: mse={mse:.4g}, {runtime:.2f}s")
    return rows


def run_benchmark(
    scenario: ScenarioSpec,
    n_datasets: int = BENCH_DATASETS,
    master_seed: int = 0,
    algorithms: Optional[Sequence[str]] = None,
    lam_nonparametric: float = DEFAULT_LAMBDA_NONPARAMETRIC,
    lam_combined: float = DEFAULT_LAMBDA_COMBINED,
    opts: Optional[SolverOptions] = None,
    jobs: int = 1,
    truth: Optional[ParametricFamily] = None,
) -> pd.DataFrame:
    """
    Benchmarks the estimation algorithms on simulated datasets.

    Args:
        scenario (ScenarioSpec): Data scenario.
        n_datasets (int): Number of simulated datasets.
        master_seed (int): Seed of the whole benchmark.
        algorithms (Optional[Sequence[str]]): Subset of NONPARAMETRIC_ALGORITHMS and
            COMBINED_ALGORITHMS; all by default.
        lam_nonparametric (float): Regularization parameter of the nonparametric problem.
        lam_combined (float): Regularization parameter of the combined problem.
        opts (Optional[SolverOptions]): Solver options shared by all algorithms.
        jobs (int): Worker count; datasets run in parallel.
        truth (Optional[ParametricFamily]): Data-generating model; the reference family by default.

    Returns:
        pd.DataFrame: One row per (dataset, algorithm) with runtime_s and mse, plus the
        noise variance sigma2 and the success flag mse <= 1.2 sigma2.
    """
    algorithms = tuple(algorithms or NONPARAMETRIC_ALGORITHMS + COMBINED_ALGORITHMS)
    unknown = set(algorithms) - set(NONPARAMETRIC_ALGORITHMS + COMBINED_ALGORITHMS)
    if unknown:
        raise InputError(f"Unknown benchmark algorithms {sorted(unknown)}")
    if n_datasets < 1:
        raise InputError("The benchmark needs at least one dataset")
    truth = truth or ParametricFamily.reference()
    opts = opts or SolverOptions()
    logger.info(
        f"Benchmarking {len(algorithms)} algorithms on {n_datasets} '{scenario.name}' datasets"
    )
    tasks = [
        (scenario, truth, algorithms, lam_nonparametric, lam_combined, opts, master_seed, i)
        for i in range(n_datasets)
    ]
    rows = [row for chunk in run_tasks(_benchmark_dataset, tasks, jobs) for row in chunk]
    return pd.DataFrame(rows)


def benchmark_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Median runtime and MSE and the success fraction per algorithm."""
    grouped = frame.groupby(["scenario", "algorithm"], sort=False)
    return grouped.agg(
        median_runtime_s=("runtime_s", "median"),
        median_mse=("mse", "median"),
        success_fraction=("success", "mean"),
        sigma2=("sigma2", "first"),
    ).reset_index()
