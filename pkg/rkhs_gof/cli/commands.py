"""
Implementations of the command-line subcommands.

Each command reads a RunConfig, writes its outputs below ``config.output_dir`` and
returns the paths it wrote.
"""

import logging
import os
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from rkhs_gof.config import DEFAULT_TAU0
from rkhs_gof.cv.crossval import cross_validate_lambda
from rkhs_gof.errors import InputError
from rkhs_gof.estimators.benchmark import benchmark_summary, run_benchmark
from rkhs_gof.estimators.parametric import fit_parametric
from rkhs_gof.estimators.results import COMBINED, NONPARAMETRIC, FitResult
from rkhs_gof.estimators.tikhonov import fit_combined, fit_nonparametric, fit_smoothed_parametric
from rkhs_gof.gof.statistics import GofSettings, parse_kinds
from rkhs_gof.gof.testing import gof_tests, power_study, power_table
from rkhs_gof.kernels.operators import KernelSpec
from rkhs_gof.optimize.options import SolverOptions
from rkhs_gof.pk.covariates import SATURABLE_EXPONENTIAL, ParametricFamily, check_family_kind
from rkhs_gof.pk.scenarios import Dataset, ScenarioSpec, get_scenario, simulate_dataset
from rkhs_gof.reports.generator import generate_power_report
from rkhs_gof.reports.tables import clearance_curve_frame, write_record, write_table

from .models import RunConfig

logger = logging.getLogger("CLI-Commands")


# --- Shared helpers ---


def resolve_scenario(config: RunConfig) -> ScenarioSpec:
    scenario = (
        ScenarioSpec.from_dict(config.scenario_spec)
        if config.scenario_spec
        else get_scenario(config.scenario)
    )
    return scenario if config.n is None else scenario.with_n(config.n)


def resolve_truth(config: RunConfig) -> ParametricFamily:
    kind = check_family_kind(config.truth)
    if config.truth_tau is not None:
        return ParametricFamily(kind, tuple(config.truth_tau))
    if kind == SATURABLE_EXPONENTIAL:
        return ParametricFamily.reference()
    return ParametricFamily(kind, DEFAULT_TAU0[kind])


def load_dataset(config: RunConfig) -> Dataset:
    """The dataset of ``config.data``, or one simulated from the scenario and seed."""
    if config.data:
        if not os.path.exists(config.data):
            raise InputError(f"Dataset file {config.data} does not exist")
        return Dataset.from_csv(config.data)
    return simulate_dataset(resolve_scenario(config), resolve_truth(config), config.seed)


def solver_options(config: RunConfig) -> SolverOptions:
    return SolverOptions(max_iterations=config.max_iterations)


def _kernel(estimator: str, config: RunConfig) -> KernelSpec:
    if estimator == COMBINED:
        return KernelSpec.combined(config.bandwidth)
    return KernelSpec.nonparametric(config.bandwidth)


def _output(config: RunConfig, name: str) -> str:
    return os.path.join(config.output_dir, config.command, name)


def _cv(config: RunConfig, dataset: Dataset, estimator: str, family_kind: str) -> float:
    """Runs cross-validation, writes its curve and returns the selected lambda."""
    target = NONPARAMETRIC if estimator != COMBINED else (COMBINED, family_kind)
    result = cross_validate_lambda(
        dataset,
        target,
        _kernel(estimator, config),
        config.grid,
        config.folds,
        config.seed,
        solver_options(config),
        config.jobs,
        config.niter,
    )
    write_table(
        result.to_frame(), _output(config, f"cv_{estimator}_{family_kind}.csv"), config.provenance()
    )
    return result.selected_lambda


def resolve_settings(
    config: RunConfig,
    dataset: Optional[Dataset] = None,
    family_kind: Optional[str] = None,
    needed: Iterable[str] = (NONPARAMETRIC, COMBINED),
) -> GofSettings:
    """
    Estimator settings of ``config``; a lambda of "cv" for an estimator in ``needed`` is
    replaced by cross-validation on ``dataset``.
    """
    lams: Dict[str, float] = {}
    for estimator, value in ((NONPARAMETRIC, config.lam), (COMBINED, config.lam_combined)):
        if value == "cv" and estimator not in needed:
            continue
        if value == "cv":
            if dataset is None:
                raise InputError(f"lambda 'cv' is not available for '{config.command}'")
            lams[estimator] = _cv(config, dataset, estimator, family_kind)
        elif value is not None:
            lams[estimator] = float(value)
    settings = GofSettings(
        kernel_nonparametric=_kernel(NONPARAMETRIC, config),
        kernel_combined=_kernel(COMBINED, config),
        niter=config.niter,
        opts=solver_options(config),
    )
    for estimator, lam in lams.items():
        settings = settings.with_estimator(estimator, lam=lam)
    return settings


# --- Commands ---


def cmd_simulate(config: RunConfig) -> List[str]:
    """Simulates one dataset and writes its CSV and JSON sidecar."""
    scenario = resolve_scenario(config)
    dataset = simulate_dataset(scenario, resolve_truth(config), config.seed)
    dataset = dataset.with_observations(dataset.y, **config.provenance())
    path = _output(config, f"dataset_{scenario.name}_seed{config.seed}.csv")
    return list(dataset.to_csv(path))


def _fit(config: RunConfig, dataset: Dataset, family_kind: str) -> FitResult:
    estimator = config.estimator
    opts = solver_options(config)
    parametric = fit_parametric(family_kind, dataset, opts=opts)
    if estimator == "parametric":
        return parametric
    needed = (COMBINED,) if estimator == COMBINED else (NONPARAMETRIC,)
    settings = resolve_settings(config, dataset, family_kind, needed)
    if estimator == NONPARAMETRIC:
        return fit_nonparametric(
            dataset,
            settings.kernel_nonparametric,
            settings.lam_nonparametric,
            family_kind,
            niter=settings.niter,
            opts=opts,
            parametric_fit=parametric,
        )
    if estimator == COMBINED:
        return fit_combined(
            dataset,
            family_kind,
            settings.kernel_combined,
            settings.lam_combined,
            niter=settings.niter,
            opts=opts,
            parametric_fit=parametric,
        )
    return fit_smoothed_parametric(
        dataset,
        parametric.family.vector,
        family_kind,
        settings.kernel_nonparametric,
        settings.lam_nonparametric,
        settings.niter,
        opts,
    )


def cmd_fit(config: RunConfig) -> List[str]:
    """Fits the selected estimator; writes the fit record and the CL*(a) curve."""
    dataset = load_dataset(config)
    paths = []
    for family_kind in config.families:
        family_kind = check_family_kind(family_kind)
        fit = _fit(config, dataset, family_kind)
        stem = f"fit_{config.estimator}_{family_kind}"
        record = {**fit.to_record(), **config.provenance()}
        paths.append(write_record(record, _output(config, stem + ".json")))
        paths.append(
            write_table(
                clearance_curve_frame(fit),
                _output(config, stem + "_clearance.csv"),
                config.provenance(),
            )
        )
    return paths


def cmd_cv(config: RunConfig) -> List[str]:
    """Cross-validates lambda of the selected estimator."""
    if config.estimator not in (NONPARAMETRIC, COMBINED):
        raise InputError("Cross-validation applies to the nonparametric or combined estimator")
    dataset = load_dataset(config)
    family_kind = check_family_kind(config.families[0])
    selected = _cv(config, dataset, config.estimator, family_kind)
    record = {
        "estimator": config.estimator,
        "family": family_kind,
        "selected_lambda": selected,
        **config.provenance(),
    }
    return [
        _output(config, f"cv_{config.estimator}_{family_kind}.csv"),
        write_record(record, _output(config, f"cv_{config.estimator}_{family_kind}.json")),
    ]


def cmd_test(config: RunConfig) -> List[str]:
    """One goodness-of-fit test per family; writes the decisions as JSON."""
    dataset = load_dataset(config)
    kinds = parse_kinds(config.statistics)
    paths = []
    for family_kind in config.families:
        family_kind = check_family_kind(family_kind)
        settings = resolve_settings(config, dataset, family_kind, {k.estimator for k in kinds})
        results = gof_tests(
            dataset,
            family_kind,
            kinds,
            config.monte_carlo,
            config.alpha,
            config.seed,
            settings,
            config.jobs,
        )
        record = {
            "family": family_kind,
            "tests": [result.to_record() for result in results.values()],
            **config.provenance(),
        }
        paths.append(write_record(record, _output(config, f"test_{family_kind}.json")))
    return paths


def cmd_power(config: RunConfig) -> List[str]:
    """Power study per family; writes per-dataset JSON lines and the rejection tables."""
    scenario = resolve_scenario(config)
    truth = resolve_truth(config)
    kinds = parse_kinds(config.statistics)
    settings = resolve_settings(config, needed={k.estimator for k in kinds})
    provenance = config.provenance()
    results = []
    for family_kind in config.families:
        family_kind = check_family_kind(family_kind)
        results.append(
            power_study(
                scenario,
                truth,
                family_kind,
                kinds,
                config.datasets,
                config.monte_carlo,
                config.alpha,
                config.seed,
                settings,
                config.jobs,
                records_path=_output(config, f"records_{scenario.name}_{family_kind}.jsonl"),
                provenance={"config_hash": provenance["config_hash"]},
            )
        )
    long_frame = pd.concat([r.to_frame() for r in results], ignore_index=True)
    paths = [
        write_table(long_frame, _output(config, f"power_{scenario.name}.csv"), provenance),
        write_table(
            power_table(results, "rejection_rate"),
            _output(config, f"power_{scenario.name}_table.csv"),
            provenance,
        ),
    ]
    if config.pdf:
        paths.append(
            generate_power_report(
                results, _output(config, f"power_{scenario.name}.pdf"), provenance
            )
        )
    return paths


def cmd_bench(config: RunConfig) -> List[str]:
    """Benchmarks the estimation algorithms; writes raw and summary CSVs."""
    scenario = resolve_scenario(config)
    settings = resolve_settings(config)
    frame = run_benchmark(
        scenario,
        config.bench_datasets,
        config.seed,
        config.algorithms,
        settings.lam_nonparametric,
        settings.lam_combined,
        settings.opts,
        config.jobs,
        resolve_truth(config),
    )
    provenance = config.provenance()
    return [
        write_table(frame, _output(config, f"bench_{scenario.name}.csv"), provenance),
        write_table(
            benchmark_summary(frame),
            _output(config, f"bench_{scenario.name}_summary.csv"),
            provenance,
        ),
    ]


COMMAND_HANDLERS: Dict[str, Any] = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "cv": cmd_cv,
    "test": cmd_test,
    "power": cmd_power,
    "bench": cmd_bench,
}
