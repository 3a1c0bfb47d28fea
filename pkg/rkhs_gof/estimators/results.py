"""
Fit results and per-stage diagnostics.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from rkhs_gof.config import ML_PER_THETA_UNIT
from rkhs_gof.errors import ContractError
from rkhs_gof.kernels.operators import RkhsCoefficients, as_ages
from rkhs_gof.optimize.options import SolverReport
from rkhs_gof.pk.covariates import ParametricFamily

PARAMETRIC = "parametric"
NONPARAMETRIC = "nonparametric"
COMBINED = "combined"
SMOOTHED = "smoothed"


@dataclass
class StageReport:
    """
    Diagnostics of one algorithm stage (Par, Dir, AlyLin, Nonlin).

    Attributes:
        name (str): Stage name.
        objective (float): Objective after the stage.
        elapsed (float): Wall time in seconds.
        converged (bool): Whether the stage met its own stopping criterion.
        iterations (int): Iterations or closed-form solves performed.
        message (str): Termination reason or failure description.
    """

    name: str
    objective: float
    elapsed: float
    converged: bool = True
    iterations: int = 0
    message: str = ""

    @classmethod
    def from_solver(cls, name: str, report: SolverReport) -> "StageReport":
        return cls(
            name=name,
            objective=float(report.fun),
            elapsed=report.elapsed,
            converged=report.converged,
            iterations=report.iterations,
            message=report.message,
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "objective": float(self.objective),
            "elapsed": float(self.elapsed),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "message": self.message,
        }


@dataclass
class FitResult:
    """
    Outcome of an estimator.

    The fitted covariate function is f = f_tau + h_gamma, where either part may be
    absent: parametric fits carry only ``family``, nonparametric and smoothed fits only
    ``coefficients``, combined fits both.

    Attributes:
        method (str): parametric, nonparametric, combined or smoothed.
        family (Optional[ParametricFamily]): Parametric part of the fitted function.
        coefficients (Optional[RkhsCoefficients]): RKHS part of the fitted function.
        lam (Optional[float]): Regularization parameter.
        objective (float): Final objective value.
        mse (float): Mean squared residual over all n q observations.
        stages (List[StageReport]): Per-stage diagnostics.
        seed (Optional[int]): Seed of the dataset or task the fit belongs to.
        degraded (bool): True when some stage failed or did not converge.
        initial_family (Optional[ParametricFamily]): Step-1 parametric fit used only to
            initialize a nonparametric or smoothed fit.
    """

    method: str
    family: Optional[ParametricFamily] = None
    coefficients: Optional[RkhsCoefficients] = None
    lam: Optional[float] = None
    objective: float = float("nan")
    mse: float = float("nan")
    stages: List[StageReport] = field(default_factory=list)
    seed: Optional[int] = None
    degraded: bool = False
    initial_family: Optional[ParametricFamily] = None

    def __post_init__(self) -> None:
        if self.family is None and self.coefficients is None:
            raise ContractError("A fit result needs a parametric or an RKHS part")

    @property
    def failed(self) -> bool:
        return not np.isfinite(self.objective)

    @property
    def elapsed(self) -> float:
        return float(sum(stage.elapsed for stage in self.stages))

    def parameters(self, covariates: Any) -> np.ndarray:
        """Fitted theta = f(x) in L and L/day, shape (m, 4)."""
        ages = as_ages(covariates)
        out = np.zeros((ages.size, 4))
        if self.family is not None:
            out += self.family.theta(ages)
        if self.coefficients is not None:
            out += self.coefficients.evaluate(ages)
        return out

    def predictions(self, model: Any, covariates: Any) -> np.ndarray:
        """G(f(x_i), x_i) for the given mechanistic model, shape (m, q)."""
        return model.predict(self.parameters(covariates), covariates)

    def clearance_curve(self, ages: Any) -> np.ndarray:
        """Fitted CL*(a) in mL/day."""
        return self.parameters(np.asarray(ages, dtype=float))[:, 0] * ML_PER_THETA_UNIT

    def to_record(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "family": None if self.family is None else self.family.to_dict(),
            "initial_family": (
                None if self.initial_family is None else self.initial_family.to_dict()
            ),
            "coefficients": None if self.coefficients is None else self.coefficients.to_dict(),
            "lambda": self.lam,
            "objective": float(self.objective),
            "mse": float(self.mse),
            "degraded": bool(self.degraded),
            "seed": self.seed,
            "elapsed": self.elapsed,
            "stages": [stage.to_record() for stage in self.stages],
        }
