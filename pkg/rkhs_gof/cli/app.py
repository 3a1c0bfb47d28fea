"""
Argument parsing for the ``rkhs-gof`` command line.
"""

import argparse
import logging
from typing import Any, Dict, List, Optional

from rkhs_gof import __version__
from rkhs_gof.pk.covariates import FAMILY_KINDS

from .models import COMMANDS, ESTIMATORS, RunConfig

logger = logging.getLogger("CLI-App")

HELP = {
    "simulate": "simulate a dataset from a scenario",
    "fit": "fit an estimator and export the fitted clearance curve",
    "cv": "cross-validate the regularization parameter",
    "test": "run goodness-of-fit tests on one dataset",
    "power": "estimate rejection rates over simulated datasets",
    "bench": "benchmark the estimation algorithms",
}


def _csv(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _floats(value: str) -> List[float]:
    return [float(item) for item in _csv(value)]


def _common_options() -> argparse.ArgumentParser:
    """Flags accepted before and after the subcommand; unset flags stay out of the namespace."""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--jobs", type=int, help="number of parallel workers")
    common.add_argument("--output-dir", dest="output_dir", help="output directory")
    common.add_argument(
        "--paper-scale",
        "--full-scale",
        dest="full_scale",
        action="store_true",
        help="500 datasets and M=500 instead of the desk-scale 100 and 200",
    )
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return common


def _study_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", help="scenario preset: rich, sparse, noisy or multi")
    parser.add_argument("--n", type=int, help="override the number of individuals")
    parser.add_argument("--truth", choices=FAMILY_KINDS, help="data-generating family")
    parser.add_argument(
        "--truth-tau", dest="truth_tau", type=_floats, help="comma-separated truth parameters"
    )
    parser.add_argument("--data", help="dataset CSV to use instead of simulating")
    parser.add_argument(
        "--family",
        "--families",
        dest="families",
        type=_csv,
        help=f"comma-separated families out of {', '.join(FAMILY_KINDS)}",
    )
    parser.add_argument("--estimator", choices=ESTIMATORS)
    parser.add_argument(
        "--statistics", type=_csv, help="comma-separated kinds: T1,T1star,T2,S1,S1star,S2"
    )
    parser.add_argument("--lambda", dest="lam", help="nonparametric lambda, or 'cv'")
    parser.add_argument("--lambda-combined", dest="lam_combined", help="combined lambda, or 'cv'")
    parser.add_argument("--bandwidth", type=float, help="Gaussian kernel bandwidth in years")
    parser.add_argument("--niter", type=int, help="maximum AlyLin iterations")
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--grid", type=_floats, help="comma-separated CV lambda grid")
    parser.add_argument("--folds", type=int, help="cross-validation folds")
    parser.add_argument("--M", "--monte-carlo", dest="M", type=int, help="Monte Carlo replicates")
    parser.add_argument("--alpha", type=float, help="test level")
    parser.add_argument("--n-datasets", dest="n_datasets", type=int)
    parser.add_argument("--bench-datasets", dest="bench_datasets", type=int)
    parser.add_argument("--algorithms", type=_csv, help="comma-separated benchmark algorithms")
    parser.add_argument("--pdf", action="store_true", help="also write a PDF power summary")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="rkhs-gof",
        description="Goodness-of-fit tests for covariate models via RKHS regularization.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        sub = subparsers.add_parser(
            command,
            help=HELP[command],
            parents=[common],
            argument_default=argparse.SUPPRESS,
        )
        _study_options(sub)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merges defaults, the optional config file and the explicitly given flags."""
    values: Dict[str, Any] = dict(vars(args))
    path: Optional[str] = values.pop("config", None)
    values.pop("verbose", None)
    if path:
        return RunConfig.load(path, **values)
    return RunConfig(**values)
