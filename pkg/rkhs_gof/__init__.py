"""
RKHS-GOF Core Package

Nonparametric goodness-of-fit tests for parametric covariate models in nonlinear
inverse problems, with a two-compartment pharmacokinetic simulation study.
"""

__all__ = [
    "kernels",
    "inverse",
    "optimize",
    "estimators",
    "gof",
    "cv",
    "pk",
    "cli",
    "reports",
]

__version__ = "1.0.0"
