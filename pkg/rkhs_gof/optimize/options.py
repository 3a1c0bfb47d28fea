"""
Shared option and report types for the nonlinear solvers.
"""

from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Optional

import numpy as np

from rkhs_gof.config import (
    GRADIENT_TOLERANCE,
    LM_INITIAL_DAMPING,
    LM_MAX_ITERATIONS,
    QN_MAX_ITERATIONS,
    SA_MAX_ITERATIONS,
    STEP_TOLERANCE,
)
from rkhs_gof.errors import InputError


@dataclass(frozen=True)
class SolverOptions:
    """
    Tuning knobs for levenberg_marquardt, quasi_newton and simulated_annealing.

    Attributes:
        max_iterations (Optional[int]): Iteration budget; None selects the solver default.
        gradient_tolerance (float): Convergence threshold on the gradient norm.
        step_tolerance (float): Convergence threshold on the relative step length.
        initial_damping (float): Starting Levenberg-Marquardt damping.
        temperature_start (float): Initial annealing temperature.
        temperature_decay (float): Geometric cooling factor per temperature level.
        moves_per_temperature (int): Proposals evaluated at each temperature level.
        step_scale (float): Proposal standard deviation at the starting temperature.
        seed (int): Seed of the annealing random stream.
    """

    max_iterations: Optional[int] = None
    gradient_tolerance: float = GRADIENT_TOLERANCE
    step_tolerance: float = STEP_TOLERANCE
    initial_damping: float = LM_INITIAL_DAMPING
    temperature_start: float = 10.0
    temperature_decay: float = 0.95
    moves_per_temperature: int = 50
    step_scale: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InputError("max_iterations must be at least 1")
        if self.gradient_tolerance <= 0 or self.step_tolerance <= 0:
            raise InputError("Solver tolerances must be positive")
        if self.initial_damping <= 0:
            raise InputError("initial_damping must be positive")
        if self.temperature_start <= 0 or not 0 < self.temperature_decay < 1:
            raise InputError("Annealing needs a positive start temperature and decay in (0, 1)")
        if self.moves_per_temperature < 1 or self.step_scale <= 0:
            raise InputError("Annealing needs positive moves_per_temperature and step_scale")

    def iterations(self, default: int) -> int:
        return default if self.max_iterations is None else int(self.max_iterations)

    def lm_iterations(self) -> int:
        return self.iterations(LM_MAX_ITERATIONS)

    def qn_iterations(self) -> int:
        return self.iterations(QN_MAX_ITERATIONS)

    def sa_iterations(self) -> int:
        return self.iterations(SA_MAX_ITERATIONS)

    def with_seed(self, seed: int) -> "SolverOptions":
        return replace(self, seed=int(seed))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "SolverOptions":
        known = {k: v for k, v in record.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class SolverReport:
    """
    Outcome of a solver run.

    Attributes:
        x (np.ndarray): Final point (best visited point for annealing).
        fun (float): Objective at ``x``.
        iterations (int): Iterations used.
        converged (bool): Whether a convergence criterion was met.
        elapsed (float): Wall time in seconds.
        message (str): Human-readable termination reason.
        evaluations (int): Objective evaluations.
    """

    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    elapsed: float
    message: str = ""
    evaluations: int = 0

    def to_record(self) -> Dict[str, Any]:
        return {
            "fun": float(self.fun),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "elapsed": float(self.elapsed),
            "message": self.message,
            "evaluations": int(self.evaluations),
        }
