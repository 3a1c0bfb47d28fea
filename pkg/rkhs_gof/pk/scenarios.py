"""
Simulation scenarios, datasets and their CSV serialization.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from rkhs_gof.config import AGE_RANGE_YEARS, SCENARIO_TABLE
from rkhs_gof.errors import InputError, UnknownScenarioError
from rkhs_gof.parallel import STREAM_SIMULATION, task_rng
from rkhs_gof.pk.covariates import ParametricFamily, WeightModel
from rkhs_gof.pk.model import DosingSchedule, TwoCompartmentModel

logger = logging.getLogger("PK-Scenarios")


@dataclass(frozen=True)
class ScenarioSpec:
    """
    A data scenario: sample size, noise level and sampling schedule.

    Attributes:
        name (str): Preset name or a free label for custom scenarios.
        n (int): Number of individuals.
        sigma (float): Standard deviation of the additive noise on ln C1.
        times (Tuple[float, ...]): Observation times in days.
        n_doses (int): Number of 30-day doses.
    """

    name: str
    n: int
    sigma: float
    times: Tuple[float, ...]
    n_doses: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if self.n < 1:
            raise InputError(f"Scenario '{self.name}' needs at least one individual")
        if self.sigma < 0 or not np.isfinite(self.sigma):
            raise InputError(f"Scenario '{self.name}' needs a nonnegative noise level")
        if not self.times or any(t < 0 for t in self.times):
            raise InputError(f"Scenario '{self.name}' needs nonnegative observation times")
        if self.n_doses < 1:
            raise InputError(f"Scenario '{self.name}' needs at least one dose")

    @property
    def q(self) -> int:
        return len(self.times)

    def schedule(self) -> DosingSchedule:
        return DosingSchedule(n_doses=self.n_doses)

    def model(self) -> TwoCompartmentModel:
        return TwoCompartmentModel(self.schedule(), self.times)

    def with_n(self, n: int) -> "ScenarioSpec":
        return replace(self, n=int(n))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "sigma": self.sigma,
            "times": list(self.times),
            "n_doses": self.n_doses,
        }

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "ScenarioSpec":
        return cls(
            name=record["name"],
            n=int(record["n"]),
            sigma=float(record["sigma"]),
            times=tuple(record["times"]),
            n_doses=int(record.get("n_doses", 1)),
        )


SCENARIOS: Dict[str, ScenarioSpec] = {
    name: ScenarioSpec(name, n, sigma, times, n_doses)
    for name, (n, sigma, times, n_doses) in SCENARIO_TABLE.items()
}


def get_scenario(name: str) -> ScenarioSpec:
    """Looks up a preset scenario (rich, sparse, noisy, multi)."""
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(
            f"Unknown scenario '{name}', expected one of {sorted(SCENARIOS)}"
        ) from None


@dataclass(frozen=True)
class Dataset:
    """
    Covariates and log-concentration observations of n individuals.

    Attributes:
        ages (np.ndarray): Ages in years, shape (n,).
        weights (np.ndarray): Body weights in kg, shape (n,).
        y (np.ndarray): Observations ln C1, shape (n, q).
        scenario (ScenarioSpec): Scenario the data follow.
        seed (Optional[int]): Generation seed for simulated data.
        truth (Optional[ParametricFamily]): Covariate model used for simulation.
        metadata (Dict[str, Any]): Free-form provenance (weight model, replicate index).
    """

    ages: np.ndarray
    weights: np.ndarray
    y: np.ndarray
    scenario: ScenarioSpec
    seed: Optional[int] = None
    truth: Optional[ParametricFamily] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ages = np.asarray(self.ages, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float)
        if ages.size == 0:
            raise InputError("A dataset needs at least one individual")
        if y.ndim != 2 or y.shape != (ages.size, self.scenario.q) or weights.size != ages.size:
            raise InputError(
                f"Inconsistent dataset shapes: ages {ages.shape}, weights {weights.shape}, "
                f"y {y.shape}, q={self.scenario.q}"
            )
        if not (np.all(np.isfinite(ages)) and np.all(ages >= 0)):
            raise InputError("Ages must be finite and nonnegative")
        if not (np.all(np.isfinite(weights)) and np.all(weights > 0)):
            raise InputError("Weights must be positive")
        if not np.all(np.isfinite(y)):
            raise InputError("Observations must be finite")
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.ages.size

    @property
    def q(self) -> int:
        return self.scenario.q

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.scenario.times)

    @property
    def covariates(self) -> np.ndarray:
        """(age, weight) records, shape (n, 2)."""
        return np.column_stack([self.ages, self.weights])

    def model(self) -> TwoCompartmentModel:
        return self.scenario.model()

    def with_observations(self, y: np.ndarray, **metadata: Any) -> "Dataset":
        """Same covariates and design, new observations."""
        return replace(self, y=np.asarray(y, dtype=float), metadata={**self.metadata, **metadata})

    def subset(self, index: np.ndarray) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return replace(
            self,
            ages=self.ages[index],
            weights=self.weights[index],
            y=self.y[index],
            scenario=self.scenario.with_n(index.size),
        )

    # --- Serialization ---

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per individual and timepoint."""
        n, q = self.y.shape
        return pd.DataFrame(
            {
                "id": np.repeat(np.arange(n), q),
                "age": np.repeat(self.ages, q),
                "weight": np.repeat(self.weights, q),
                "time": np.tile(self.times, n),
                "y": self.y.reshape(-1),
            }
        )

    def sidecar(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario.to_dict(),
            "seed": self.seed,
            "truth": None if self.truth is None else self.truth.to_dict(),
            "metadata": self.metadata,
        }

    def to_csv(self, path: str) -> Tuple[str, str]:
        """
        Writes the long-format CSV and a JSON metadata sidecar next to it.

        Returns:
            Tuple[str, str]: Paths of the CSV file and of the sidecar.
        """
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        meta_path = sidecar_path(path)
        with open(meta_path, "w", encoding="utf-8") as handle:
            json.dump(self.sidecar(), handle, indent=2, sort_keys=True)
        logger.info(f"Dataset with {self.n} individuals written to {path}")
        return path, meta_path

    @classmethod
    def from_csv(cls, path: str) -> "Dataset":
        frame = pd.read_csv(path)
        missing = {"id", "age", "weight", "time", "y"} - set(frame.columns)
        if missing:
            raise InputError(f"Dataset file {path} lacks columns {sorted(missing)}")
        frame = frame.sort_values(["id", "time"], kind="stable")
        per_id = frame.groupby("id", sort=True)
        ages = per_id["age"].first().to_numpy()
        weights = per_id["weight"].first().to_numpy()
        times = tuple(per_id.get_group(frame["id"].iloc[0])["time"].to_numpy())
        y = np.vstack([group["y"].to_numpy() for _, group in per_id])

        meta: Dict[str, Any] = {}
        if os.path.exists(sidecar_path(path)):
            with open(sidecar_path(path), encoding="utf-8") as handle:
                meta = json.load(handle)
        if meta.get("scenario"):
            scenario = ScenarioSpec.from_dict(meta["scenario"]).with_n(ages.size)
        else:
            scenario = ScenarioSpec("custom", ages.size, 0.0, times)
        truth = meta.get("truth")
        return cls(
            ages=ages,
            weights=weights,
            y=y,
            scenario=scenario,
            seed=meta.get("seed"),
            truth=None if truth is None else ParametricFamily.from_dict(truth),
            metadata=meta.get("metadata", {}),
        )


def sidecar_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def simulate_dataset(
    scenario: ScenarioSpec,
    family: ParametricFamily,
    master_seed: int,
    weight_model: Optional[WeightModel] = None,
) -> Dataset:
    """
    Simulates a virtual clinical dataset.

    Ages are uniform on [0, 20] years, weights follow the weight surrogate, and
    y_i = G(f_tau(a_i), (a_i, w_i)) + eps_i with eps_i ~ N(0, sigma^2 I_q).

    Args:
        scenario (ScenarioSpec): Design and noise level.
        family (ParametricFamily): True covariate model.
        master_seed (int): Seed; the same seed gives the same dataset.
        weight_model (Optional[WeightModel]): Weight surrogate parameters.

    Returns:
        Dataset: The simulated data with provenance.
    """
    weight_model = weight_model or WeightModel()
    rng = task_rng(master_seed, STREAM_SIMULATION)
    ages = rng.uniform(AGE_RANGE_YEARS[0], AGE_RANGE_YEARS[1], scenario.n)
    weights = weight_model.sample(ages, rng)
    covariates = np.column_stack([ages, weights])
    mean = scenario.model().predict(family.theta(ages), covariates)
    noise = rng.standard_normal(mean.shape)
    y = mean + scenario.sigma * noise
    logger.debug(f"Simulated '{scenario.name}' dataset: n={scenario.n}, seed={master_seed}")
    return Dataset(
        ages=ages,
        weights=weights,
        y=y,
        scenario=scenario,
        seed=int(master_seed),
        truth=family,
        metadata={"weight_model": weight_model.to_dict()},
    )
