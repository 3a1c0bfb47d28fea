"""
Goodness-of-fit decisions and power studies.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from rkhs_gof.config import ALPHA
from rkhs_gof.errors import ContractError, InputError, RkhsGofError
from rkhs_gof.gof.calibration import (
    check_level,
    critical_value,
    empirical_p_value,
    monte_carlo_null_samples,
)
from rkhs_gof.gof.statistics import GofSettings, StatisticKind, parse_kinds, run_pipeline
from rkhs_gof.kernels.operators import KernelSpec
from rkhs_gof.parallel import STREAM_POWER, derived_seed, run_tasks
from rkhs_gof.pk.covariates import ParametricFamily, check_family_kind
from rkhs_gof.pk.scenarios import ScenarioSpec, simulate_dataset

logger = logging.getLogger("GOF-Testing")


@dataclass
class TestResult:
    """
    Outcome of one goodness-of-fit test.

    Attributes:
        kind (StatisticKind): Statistic used.
        observed (float): Statistic on the data.
        sample (np.ndarray): Monte Carlo statistics under the fitted null model.
        critical_value (float): Empirical (1 - alpha)-quantile of ``sample``.
        p_value (float): Empirical p-value in (0, 1].
        reject (bool): observed > critical_value.
        alpha (float): Level.
        master_seed (int): Seed of the calibration.
        lam (float): Regularization parameter of the estimator behind the statistic.
        family_kind (str): Null family.
        tau_hat (List[float]): Fitted null parameters.
        n_failed (int): Excluded Monte Carlo replicates.
        dataset_seed (Optional[int]): Seed of the tested dataset, if simulated.
        degraded (bool): Whether any fit on the observed data was degraded.
    """

    kind: StatisticKind
    observed: float
    sample: np.ndarray
    critical_value: float
    p_value: float
    reject: bool
    alpha: float
    master_seed: int
    lam: float
    family_kind: str
    tau_hat: List[float] = field(default_factory=list)
    n_failed: int = 0
    dataset_seed: Optional[int] = None
    degraded: bool = False

    @property
    def M(self) -> int:
        return int(self.sample.size)

    def to_record(self, include_sample: bool = True) -> Dict[str, Any]:
        record = {
            "kind": self.kind.value,
            "observed": float(self.observed),
            "critical_value": float(self.critical_value),
            "p_value": float(self.p_value),
            "reject": bool(self.reject),
            "alpha": float(self.alpha),
            "M": self.M,
            "n_failed": int(self.n_failed),
            "master_seed": int(self.master_seed),
            "lambda": float(self.lam),
            "family_kind": self.family_kind,
            "tau_hat": [float(t) for t in self.tau_hat],
            "dataset_seed": self.dataset_seed,
            "degraded": bool(self.degraded),
        }
        if include_sample:
            record["sample"] = [float(v) for v in self.sample]
        return record


def gof_tests(
    dataset: Any,
    family_kind: str,
    kinds: Sequence[Any],
    M: int,
    alpha: float = ALPHA,
    master_seed: int = 0,
    settings: Optional[GofSettings] = None,
    jobs: int = 1,
    sigma: Optional[float] = None,
) -> Dict[StatisticKind, TestResult]:
    """
    Tests H0: f belongs to the family ``family_kind`` with several statistics at once.

    The null family is fitted to the data, the observed statistics are computed, and all
    kinds are calibrated on the same M synthetic datasets from the fitted null model.
    Large values favour the alternative: H0 is rejected when the observed statistic
    exceeds the empirical (1 - alpha)-quantile of its Monte Carlo sample.

    Raises:
        ContractError: If M < 1 or alpha is outside (0, 1).
        FitFailedError: If a fit on the observed data fails.
        CalibrationError: If too many Monte Carlo replicates fail.
    """
    if M < 1:
        raise ContractError(f"A goodness-of-fit test needs M >= 1, got {M}")
    alpha = check_level(alpha)
    kinds = parse_kinds(kinds)
    settings = settings or GofSettings()

    observed = run_pipeline(kinds, dataset, family_kind, settings)
    tau_hat = observed.parametric.family.vector
    null = monte_carlo_null_samples(
        dataset, family_kind, tau_hat, kinds, M, sigma, master_seed, settings, jobs
    )

    results: Dict[StatisticKind, TestResult] = {}
    for kind in kinds:
        sample = null.values[kind]
        value = observed.statistics[kind]
        c_alpha = critical_value(sample, alpha)
        results[kind] = TestResult(
            kind=kind,
            observed=value,
            sample=sample,
            critical_value=c_alpha,
            p_value=empirical_p_value(sample, value),
            reject=bool(value > c_alpha),
            alpha=alpha,
            master_seed=int(master_seed),
            lam=settings.lam(kind.estimator),
            family_kind=family_kind,
            tau_hat=[float(t) for t in tau_hat],
            n_failed=null.n_failed,
            dataset_seed=getattr(dataset, "seed", None),
            degraded=observed.degraded,
        )
        logger.info(
            f"{kind.value} ({family_kind}): T={value:.4g}, c={c_alpha:.4g}, "
            f"p={results[kind].p_value:.3f}, {'reject' if results[kind].reject else 'accept'}"
        )
    return results


def gof_test(
    dataset: Any,
    family_kind: str,
    kernel: Optional[KernelSpec],
    lam: Optional[float],
    kind: Any,
    M: int,
    alpha: float = ALPHA,
    master_seed: int = 0,
    settings: Optional[GofSettings] = None,
    jobs: int = 1,
    sigma: Optional[float] = None,
) -> TestResult:
    """
    Single-statistic goodness-of-fit test.

    ``kernel`` and ``lam`` configure the estimator the statistic depends on; None keeps
    the value from ``settings``.
    """
    kind = parse_kinds(kind)[0]
    settings = (settings or GofSettings()).with_estimator(kind.estimator, kernel, lam)
    results = gof_tests(
        dataset, family_kind, [kind], M, alpha, master_seed, settings, jobs, sigma
    )
    return results[kind]


# --- Power studies ---


def _power_task(
    scenario: ScenarioSpec,
    truth: ParametricFamily,
    null_family_kind: str,
    kinds: List[StatisticKind],
    M: int,
    alpha: float,
    master_seed: int,
    settings: GofSettings,
    index: int,
) -> Dict[str, Any]:
    data_seed = derived_seed(master_seed, STREAM_POWER, index)
    record: Dict[str, Any] = {"dataset": index, "seed": data_seed}
    try:
        dataset = simulate_dataset(scenario, truth, data_seed)
        results = gof_tests(
            dataset,
            null_family_kind,
            kinds,
            M,
            alpha,
            derived_seed(master_seed, STREAM_POWER, index, 1),
            settings,
        )
    except RkhsGofError as exc:
        logger.warning(f"Power study dataset {index} excluded: {exc}")
        record.update(failed=True, message=f"{type(exc).__name__}: {exc}")
        return record
    record.update(
        failed=False,
        tests={k.value: r.to_record(include_sample=False) for k, r in results.items()},
    )
    return record


@dataclass
class PowerResult:
    """
    Rejection frequencies of a power study.

    Attributes:
        scenario (str): Scenario name.
        truth_kind (str): Data-generating family.
        null_family_kind (str): Tested family.
        kinds (List[StatisticKind]): Statistics.
        alpha (float): Level.
        M (int): Monte Carlo replicates per test.
        master_seed (int): Seed of the study.
        records (List[Dict[str, Any]]): One record per dataset, in dataset order.
    """

    scenario: str
    truth_kind: str
    null_family_kind: str
    kinds: List[StatisticKind]
    alpha: float
    M: int
    master_seed: int
    records: List[Dict[str, Any]]

    @property
    def null_is_true(self) -> bool:
        return self.truth_kind == self.null_family_kind

    @property
    def completed(self) -> List[Dict[str, Any]]:
        return [r for r in self.records if not r.get("failed")]

    @property
    def n_failed(self) -> int:
        return len(self.records) - len(self.completed)

    def rejections(self, kind: Any) -> int:
        kind = parse_kinds(kind)[0]
        return sum(bool(r["tests"][kind.value]["reject"]) for r in self.completed)

    def rejection_rate(self, kind: Any) -> float:
        n = len(self.completed)
        return self.rejections(kind) / n if n else float("nan")

    def standard_error(self, kind: Any) -> float:
        """Binomial standard error of the rejection rate."""
        n = len(self.completed)
        if not n:
            return float("nan")
        rate = self.rejection_rate(kind)
        return math.sqrt(rate * (1.0 - rate) / n)

    def error_rate(self, kind: Any) -> float:
        """Type I error when the null family is true, type II error otherwise."""
        rate = self.rejection_rate(kind)
        return rate if self.null_is_true else 1.0 - rate

    def p_values(self, kind: Any) -> np.ndarray:
        kind = parse_kinds(kind)[0]
        return np.array([r["tests"][kind.value]["p_value"] for r in self.completed])

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "scenario": self.scenario,
                "truth": self.truth_kind,
                "family": self.null_family_kind,
                "statistic": kind.value,
                "n_datasets": len(self.completed),
                "n_failed": self.n_failed,
                "rejections": self.rejections(kind),
                "rejection_rate": self.rejection_rate(kind),
                "standard_error": self.standard_error(kind),
                "error_rate": self.error_rate(kind),
                "alpha": self.alpha,
                "M": self.M,
            }
            for kind in self.kinds
        ]
        return pd.DataFrame(rows)


def _load_records(path: str, provenance: Dict[str, Any]) -> Dict[int, Dict[str, Any]]:
    """Completed dataset records of an earlier run with the same provenance."""
    done: Dict[int, Dict[str, Any]] = {}
    if not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                logger.warning(f"Skipping unreadable line in {path}")
                continue
            if all(record.get(key) == value for key, value in provenance.items()):
                done[int(record["dataset"])] = record
    return done


def power_study(
    scenario: ScenarioSpec,
    truth: Optional[ParametricFamily],
    null_family_kind: str,
    kinds: Sequence[Any],
    n_datasets: int,
    M: int,
    alpha: float = ALPHA,
    master_seed: int = 0,
    settings: Optional[GofSettings] = None,
    jobs: int = 1,
    records_path: Optional[str] = None,
    provenance: Optional[Dict[str, Any]] = None,
) -> PowerResult:
    """
    Estimates the rejection frequency of the goodness-of-fit tests over simulated datasets.

    Dataset i is simulated from seed derived_seed(master_seed, STREAM_POWER, i) and
    tested with its own calibration seed. Datasets run in parallel; each finished dataset
    is appended to ``records_path`` as a JSON line, and datasets already recorded there
    under the same ``provenance`` are not recomputed.

    Args:
        scenario (ScenarioSpec): Data scenario.
        truth (Optional[ParametricFamily]): Data-generating model; the reference family by default.
        null_family_kind (str): Tested family.
        kinds (Sequence[StatisticKind]): Statistics.
        n_datasets (int): Number of simulated datasets.
        M (int): Monte Carlo replicates per test.
        alpha (float): Level.
        master_seed (int): Seed of the study.
        settings (Optional[GofSettings]): Estimator configuration.
        jobs (int): Worker count.
        records_path (Optional[str]): JSON-lines file for per-dataset records.
        provenance (Optional[Dict[str, Any]]): Extra fields stored in every record and
            matched on resume (e.g. the config hash).

    Returns:
        PowerResult: Per-dataset records and rejection rates.
    """
    if n_datasets < 1:
        raise InputError("A power study needs at least one dataset")
    if M < 1:
        raise ContractError(f"A goodness-of-fit test needs M >= 1, got {M}")
    alpha = check_level(alpha)
    null_family_kind = check_family_kind(null_family_kind)
    kinds = parse_kinds(kinds)
    truth = truth or ParametricFamily.reference()
    settings = settings or GofSettings()
    provenance = {
        **(provenance or {}),
        "scenario": scenario.name,
        "truth": truth.kind,
        "family": null_family_kind,
        "master_seed": int(master_seed),
        "M": int(M),
        "alpha": alpha,
        "kinds": [k.value for k in kinds],
    }

    done = _load_records(records_path, provenance) if records_path else {}
    pending = [i for i in range(n_datasets) if i not in done]
    logger.info(
        f"Power study '{scenario.name}', {null_family_kind} null: {len(pending)} of "
        f"{n_datasets} datasets to run, M={M}"
    )
    if records_path:
        os.makedirs(os.path.dirname(os.path.abspath(records_path)), exist_ok=True)

    chunk = max(int(jobs or 1), 1)
    for start in range(0, len(pending), chunk):
        indices = pending[start : start + chunk]
        tasks = [
            (scenario, truth, null_family_kind, kinds, M, alpha, master_seed, settings, i)
            for i in indices
        ]
        for record in run_tasks(_power_task, tasks, jobs):
            record.update(provenance)
            done[record["dataset"]] = record
            if records_path:
                with open(records_path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(record, sort_keys=True) + "\n")
        logger.info(f"Power study progress: {len(done)}/{n_datasets} datasets")

    records = [done[i] for i in range(n_datasets)]
    result = PowerResult(
        scenario=scenario.name,
        truth_kind=truth.kind,
        null_family_kind=null_family_kind,
        kinds=kinds,
        alpha=alpha,
        M=M,
        master_seed=int(master_seed),
        records=records,
    )
    if result.n_failed:
        logger.warning(f"{result.n_failed} of {n_datasets} datasets excluded from the study")
    return result


def power_table(results: Sequence[PowerResult], value: str = "rejection_rate") -> pd.DataFrame:
    """
    Rejection or error rates with rows (family, statistic) and one column per scenario.

    Args:
        results (Sequence[PowerResult]): Power studies to tabulate.
        value (str): "rejection_rate", "error_rate" or "standard_error".
    """
    if value not in ("rejection_rate", "error_rate", "standard_error"):
        raise InputError(f"Unknown table value '{value}'")
    if not results:
        raise InputError("No power results to tabulate")
    frame = pd.concat([r.to_frame() for r in results], ignore_index=True)
    return frame.pivot_table(
        index=["family", "statistic"], columns="scenario", values=value, sort=False
    )
