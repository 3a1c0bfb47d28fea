"""
Run configuration of the command-line tools.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Union

from rkhs_gof.config import (
    ALPHA,
    ALYLIN_ITERATIONS,
    BENCH_DATASETS,
    CV_FOLDS,
    CV_GRID,
    DEFAULT_BANDWIDTH_YEARS,
    DEFAULT_JOBS,
    DESK_SCALE,
    FULL_SCALE,
    OUTPUT_DIR,
)
from rkhs_gof.errors import InputError

COMMANDS = ("simulate", "fit", "cv", "test", "power", "bench")
ESTIMATORS = ("parametric", "nonparametric", "combined", "smoothed")

# Fields that change where or how fast a run executes, not what it computes.
EXECUTION_FIELDS = ("jobs", "output_dir")


@dataclass
class RunConfig:
    """
    Everything that determines a CLI run besides the code version.

    Attributes:
        command (str): One of COMMANDS.
        scenario (str): Scenario preset name.
        scenario_spec (Optional[Dict]): Custom scenario; overrides ``scenario``.
        n (Optional[int]): Overrides the scenario's number of individuals.
        truth (str): Family of the data-generating covariate model.
        truth_tau (Optional[List[float]]): Its parameters; reference values by default.
        families (List[str]): Families to fit or test.
        estimator (str): Estimator of ``fit`` and ``cv``.
        statistics (List[str]): Statistic kinds of ``test`` and ``power``.
        lam (Union[float, str, None]): Lambda of the nonparametric fit, or "cv".
        lam_combined (Union[float, str, None]): Lambda of the combined fit, or "cv".
        bandwidth (float): Gaussian kernel bandwidth in years.
        niter (int): Maximum AlyLin iterations.
        grid (List[float]): Cross-validation grid.
        folds (int): Cross-validation folds.
        M (Optional[int]): Monte Carlo replicates; None selects the scale preset.
        alpha (float): Test level.
        n_datasets (Optional[int]): Power study datasets; None selects the scale preset.
        full_scale (bool): Use the long-run preset instead of the desk-scale one.
        bench_datasets (int): Datasets per benchmark scenario.
        algorithms (Optional[List[str]]): Benchmark algorithms; all by default.
        data (Optional[str]): Dataset CSV to use instead of simulating one.
        seed (int): Master seed.
        jobs (int): Worker count.
        output_dir (str): Output directory.
        pdf (bool): Also write a PDF summary of a power study.
        max_iterations (Optional[int]): Solver iteration budget.
    """

    command: str = "simulate"
    scenario: str = "rich"
    scenario_spec: Optional[Dict[str, Any]] = None
    n: Optional[int] = None
    truth: str = "saturable_exponential"
    truth_tau: Optional[List[float]] = None
    families: List[str] = field(default_factory=lambda: ["saturable_exponential"])
    estimator: str = "nonparametric"
    statistics: List[str] = field(default_factory=lambda: ["T1"])
    lam: Union[float, str, None] = None
    lam_combined: Union[float, str, None] = None
    bandwidth: float = DEFAULT_BANDWIDTH_YEARS
    niter: int = ALYLIN_ITERATIONS
    grid: List[float] = field(default_factory=lambda: list(CV_GRID))
    folds: int = CV_FOLDS
    M: Optional[int] = None
    alpha: float = ALPHA
    n_datasets: Optional[int] = None
    full_scale: bool = False
    bench_datasets: int = BENCH_DATASETS
    algorithms: Optional[List[str]] = None
    data: Optional[str] = None
    seed: int = 0
    jobs: int = DEFAULT_JOBS
    output_dir: str = OUTPUT_DIR
    pdf: bool = False
    max_iterations: Optional[int] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"Unknown command '{self.command}'")
        if self.estimator not in ESTIMATORS:
            raise InputError(f"Unknown estimator '{self.estimator}'")
        if isinstance(self.families, str):
            self.families = [f for f in self.families.split(",") if f]
        if isinstance(self.statistics, str):
            self.statistics = [s for s in self.statistics.split(",") if s]
        if isinstance(self.algorithms, str):
            self.algorithms = [a for a in self.algorithms.split(",") if a]
        if not self.families:
            raise InputError("At least one family is required")
        self.lam = _parse_lambda(self.lam)
        self.lam_combined = _parse_lambda(self.lam_combined)
        if self.jobs < 1:
            raise InputError("jobs must be at least 1")

    @property
    def scale(self) -> Dict[str, int]:
        return FULL_SCALE if self.full_scale else DESK_SCALE

    @property
    def monte_carlo(self) -> int:
        return int(self.M if self.M is not None else self.scale["monte_carlo"])

    @property
    def datasets(self) -> int:
        return int(self.n_datasets if self.n_datasets is not None else self.scale["n_datasets"])

    # --- Serialization ---

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(record) - known
        if unknown:
            raise InputError(f"Unknown configuration keys {sorted(unknown)}")
        return cls(**record)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path: str, **overrides: Any) -> "RunConfig":
        """Reads a JSON config; ``overrides`` (command-line flags) win over file values."""
        try:
            with open(path, encoding="utf-8") as handle:
                record = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputError(f"Config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise InputError(f"Config file {path} must hold a JSON object")
        return cls.from_dict({**record, **overrides})

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of every field that affects results."""
        record = {k: v for k, v in self.to_dict().items() if k not in EXECUTION_FIELDS}
        canonical = json.dumps(record, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def provenance(self) -> Dict[str, Any]:
        return {"config_hash": self.config_hash(), "seed": int(self.seed)}


def _parse_lambda(value: Any) -> Union[float, str, None]:
    if value is None or value == "cv":
        return value
    try:
        lam = float(value)
    except (TypeError, ValueError):
        raise InputError(f"lambda must be a positive number or 'cv', got {value!r}") from None
    if not lam > 0:
        raise InputError(f"lambda must be positive, got {lam}")
    return lam
