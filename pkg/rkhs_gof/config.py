"""
Configuration management for the RKHS goodness-of-fit toolkit.
This module handles environment variables, study constants and numerical defaults.
"""

import os
from typing import Dict, Tuple

from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

# --- System Metadata ---
PROJECT_NAME: str = "RKHS-GOF"
VERSION: str = "1.0.0"
DEBUG: bool = os.getenv("DEBUG", "False").lower() == "true"

# --- Runtime Environment ---
OUTPUT_DIR: str = os.getenv("RKHS_GOF_OUTPUT_DIR", os.path.join(os.getcwd(), "rkhs_gof_output"))
DEFAULT_JOBS: int = int(os.getenv("RKHS_GOF_JOBS", "1"))
RUN_SLOW_TESTS: bool = os.getenv("RKHS_GOF_RUN_SLOW", "0").lower() in ("1", "true", "yes")

# --- Units ---
# Family parameters use mL and mL/day; the estimation coordinate theta uses L and L/day.
ML_PER_THETA_UNIT: float = 1000.0
WEEKS_PER_YEAR: float = 52.1775
REFERENCE_WEIGHT_KG: float = 70.0
ALLOMETRIC_CLEARANCE_EXPONENT: float = 0.75
ALLOMETRIC_VOLUME_EXPONENT: float = 1.0

# --- Dosing ---
DOSE_PER_KG_MG: float = 15.0
DOSING_INTERVAL_DAYS: float = 30.0

# --- Covariate Model Parameters (saturable exponential truth) ---
# alpha follows the corrected value 0.589 = 1 - 0.411.
REFERENCE_TAU: Dict[str, float] = {
    "alpha": 0.589,
    "beta": 0.133,  # 1/year
    "cl_max": 198.0,  # mL/day
    "v1": 4090.0,  # mL
    "q": 879.0,  # mL/day
    "v2": 2230.0,  # mL
}

# --- Simulation Scenarios ---
# name -> (individuals, sigma on log scale, observation times in days, number of doses)
SCENARIO_TABLE: Dict[str, Tuple[int, float, Tuple[float, ...], int]] = {
    "rich": (100, 0.1, (0.5, 1.0, 2.0, 3.0, 4.0, 7.0, 14.0, 21.0), 1),
    "sparse": (20, 0.1, (1.0, 2.0, 4.0, 7.0, 21.0), 1),
    "noisy": (100, 0.3, (0.5, 1.0, 2.0, 3.0, 4.0, 7.0, 14.0, 21.0), 1),
    "multi": (
        100,
        0.3,
        (0.5, 1.0, 2.0, 3.0, 4.0, 7.0, 14.0, 21.0, 40.0, 55.0, 70.0, 85.0, 100.0, 115.0),
        4,
    ),
}
AGE_RANGE_YEARS: Tuple[float, float] = (0.0, 20.0)

# --- Weight-for-age Surrogate ---
WEIGHT_AT_BIRTH_KG: float = 3.5
WEIGHT_GAIN_KG: float = 66.5
WEIGHT_HILL_EXPONENT: float = 1.4
WEIGHT_HALF_AGE_YEARS: float = 9.0
WEIGHT_CV: float = 0.15

# --- Kernels ---
DEFAULT_BANDWIDTH_YEARS: float = 100.0 / WEEKS_PER_YEAR
PSD_RELATIVE_TOLERANCE: float = 1e-10

# --- Estimation ---
DEFAULT_LAMBDA_NONPARAMETRIC: float = 1e-3
DEFAULT_LAMBDA_COMBINED: float = 1e-3
ALYLIN_ITERATIONS: int = 10
ALYLIN_RELATIVE_TOLERANCE: float = 1e-6
FD_RELATIVE_STEP: float = 1e-6

# --- Solvers ---
LM_MAX_ITERATIONS: int = 500
QN_MAX_ITERATIONS: int = 2000
SA_MAX_ITERATIONS: int = 20000
GRADIENT_TOLERANCE: float = 1e-8
STEP_TOLERANCE: float = 1e-12
LM_INITIAL_DAMPING: float = 1e-3
LM_DAMPING_FACTOR: float = 3.0
ARMIJO_CONSTANT: float = 1e-4
BACKTRACK_SHRINK: float = 0.5

# --- Cross-validation ---
CV_FOLDS: int = 5
# 13 log-spaced points from 1e-6 to 1e3
CV_GRID: Tuple[float, ...] = tuple(10.0 ** (-6.0 + 0.75 * i) for i in range(13))

# --- Goodness-of-fit Testing ---
ALPHA: float = 0.05
DESK_SCALE: Dict[str, int] = {"n_datasets": 100, "monte_carlo": 200}
FULL_SCALE: Dict[str, int] = {"n_datasets": 500, "monte_carlo": 500}
MAX_FAILED_FRACTION: float = 0.05

# Starting values (mL and mL/day) for parametric least squares
DEFAULT_TAU0: Dict[str, Tuple[float, ...]] = {
    "saturable_exponential": (0.589, 0.133, 198.0, 4090.0, 879.0, 2230.0),
    "affine_linear": (90.0, 6.0, 4090.0, 879.0, 2230.0),
    "michaelis_menten": (220.0, 2.0, 4090.0, 879.0, 2230.0),
}

# --- Benchmark ---
BENCH_DATASETS: int = 25
BENCH_MSE_FACTOR: float = 1.2
# Order-of-magnitude starting values (mL and mL/day) for parametric starts
ORDER_OF_MAGNITUDE_TAU: Dict[str, Tuple[float, ...]] = {
    "saturable_exponential": (0.5, 0.1, 100.0, 1000.0, 1000.0, 1000.0),
    "affine_linear": (100.0, 10.0, 1000.0, 1000.0, 1000.0),
    "michaelis_menten": (100.0, 1.0, 1000.0, 1000.0, 1000.0),
}

# --- Output ---
CLEARANCE_AGE_GRID_STEP: float = 0.25
