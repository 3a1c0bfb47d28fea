"""
Monte Carlo calibration of goodness-of-fit statistics under the fitted null model.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from rkhs_gof.config import MAX_FAILED_FRACTION
from rkhs_gof.errors import CalibrationError, ContractError, InputError, RkhsGofError
from rkhs_gof.gof.statistics import GofSettings, StatisticKind, parse_kinds, run_pipeline
from rkhs_gof.kernels.operators import KernelSpec
from rkhs_gof.parallel import STREAM_MONTE_CARLO, run_tasks, task_rng
from rkhs_gof.pk.covariates import ParametricFamily

logger = logging.getLogger("GOF-Calibration")


def check_level(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ContractError(f"The level alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def critical_value(sample: Sequence[float], alpha: float) -> float:
    """
    Empirical (1 - alpha)-quantile of a Monte Carlo sample.

    Uses the order statistic of rank ceil((1 - alpha)(M + 1)); when that rank exceeds M
    the sample is too small for the level and the critical value is +inf (never reject).
    """
    check_level(alpha)
    values = np.sort(np.asarray(sample, dtype=float))
    if values.size == 0:
        raise ContractError("A critical value needs at least one Monte Carlo value")
    rank = math.ceil((1.0 - alpha) * (values.size + 1) - 1e-9)
    if rank > values.size:
        return float("inf")
    return float(values[rank - 1])


def empirical_p_value(sample: Sequence[float], observed: float) -> float:
    """(1 + #{T_m >= T_obs}) / (M + 1)."""
    values = np.asarray(sample, dtype=float)
    return float((1 + np.count_nonzero(values >= observed)) / (values.size + 1))


@dataclass
class NullSample:
    """
    Monte Carlo statistics of all requested kinds on shared replicates.

    Attributes:
        values (Dict[StatisticKind, np.ndarray]): Statistics of the successful replicates,
            in replicate order.
        n_failed (int): Replicates excluded because a fit failed.
        n_total (int): Replicates attempted.
    """

    values: Dict[StatisticKind, np.ndarray]
    n_failed: int
    n_total: int

    @property
    def M(self) -> int:
        return self.n_total - self.n_failed

    def sample(self, kind: Any) -> np.ndarray:
        return self.values[parse_kinds(kind)[0]]


def null_observations(
    dataset: Any, family: ParametricFamily, sigma: float, rng: np.random.Generator
) -> np.ndarray:
    """y_i = G(f_tau_hat(x_i), x_i) + eps_i, eps_i ~ N(0, sigma^2 I)."""
    mean = dataset.model().predict(family.theta(dataset.ages), dataset.covariates)
    return mean + sigma * rng.standard_normal(mean.shape)


def _replicate(
    dataset: Any,
    family: ParametricFamily,
    kinds: List[StatisticKind],
    sigma: float,
    master_seed: int,
    index: int,
    settings: GofSettings,
) -> Optional[Dict[StatisticKind, float]]:
    rng = task_rng(master_seed, STREAM_MONTE_CARLO, index)
    synthetic = dataset.with_observations(
        null_observations(dataset, family, sigma, rng), replicate=index
    )
    try:
        result = run_pipeline(kinds, synthetic, family.kind, settings, tau0=family.vector)
    except RkhsGofError as exc:
        logger.warning(f"Monte Carlo replicate {index} excluded: {exc}")
        return None
    return result.statistics


def monte_carlo_null_samples(
    dataset: Any,
    family_kind: str,
    tau_hat: Sequence[float],
    kinds: Sequence[Any],
    M: int,
    sigma: Optional[float] = None,
    master_seed: int = 0,
    settings: Optional[GofSettings] = None,
    jobs: int = 1,
) -> NullSample:
    """
    Simulates M datasets from the fitted null model and reruns the full pipeline on each.

    Every replicate keeps the covariates of ``dataset`` and draws its noise from its own
    stream (master_seed, replicate index), so the sample does not depend on ``jobs``.
    Each replicate refits the null family starting from tau_hat.

    Args:
        dataset (Dataset): Supplies covariates and design.
        family_kind (str): Null family.
        tau_hat (Sequence[float]): Fitted null parameters.
        kinds (Sequence[StatisticKind]): Statistics to calibrate on the same replicates.
        M (int): Number of replicates.
        sigma (Optional[float]): Noise standard deviation; defaults to the scenario's.
        master_seed (int): Seed of the calibration.
        settings (Optional[GofSettings]): Estimator configuration.
        jobs (int): Worker count.

    Returns:
        NullSample: Statistics per kind.

    Raises:
        ContractError: If M < 1.
        CalibrationError: If more than 5% of the replicates failed.
    """
    if M < 1:
        raise ContractError(f"Monte Carlo calibration needs M >= 1, got {M}")
    sigma = dataset.scenario.sigma if sigma is None else float(sigma)
    if not (np.isfinite(sigma) and sigma >= 0):
        raise InputError(f"sigma must be finite and nonnegative, got {sigma}")
    kinds = parse_kinds(kinds)
    settings = settings or GofSettings()
    family = ParametricFamily(family_kind, tuple(float(t) for t in tau_hat))

    logger.info(
        f"Calibrating {', '.join(k.value for k in kinds)} on {M} replicates "
        f"({family.kind} null, sigma={sigma:g})"
    )
    tasks = [(dataset, family, kinds, sigma, master_seed, m, settings) for m in range(M)]
    outcomes = run_tasks(_replicate, tasks, jobs)
    succeeded = [outcome for outcome in outcomes if outcome is not None]
    n_failed = M - len(succeeded)
    if n_failed > MAX_FAILED_FRACTION * M:
        raise CalibrationError(n_failed, M)
    if n_failed:
        logger.warning(f"{n_failed} of {M} Monte Carlo replicates excluded")
    values = {kind: np.array([stats[kind] for stats in succeeded]) for kind in kinds}
    return NullSample(values=values, n_failed=n_failed, n_total=M)


def monte_carlo_null_sample(
    dataset: Any,
    family_kind: str,
    tau_hat: Sequence[float],
    kernel: Optional[KernelSpec],
    lam: Optional[float],
    kind: Any,
    M: int,
    sigma: Optional[float] = None,
    master_seed: int = 0,
    settings: Optional[GofSettings] = None,
    jobs: int = 1,
) -> np.ndarray:
    """
    Null sample of a single statistic.

    ``kernel`` and ``lam`` configure the estimator the statistic depends on (combined
    for T2 and S2, nonparametric otherwise); None keeps the value from ``settings``.
    """
    kind = parse_kinds(kind)[0]
    settings = (settings or GofSettings()).with_estimator(kind.estimator, kernel, lam)
    null = monte_carlo_null_samples(
        dataset, family_kind, tau_hat, [kind], M, sigma, master_seed, settings, jobs
    )
    return null.sample(kind)
