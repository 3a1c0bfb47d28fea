"""
Exception hierarchy shared by all RKHS-GOF modules.
"""

from typing import Optional


class RkhsGofError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(RkhsGofError, ValueError):
    """Invalid user or data input."""


class UnknownScenarioError(InputError):
    """A scenario preset name that does not exist."""


class ContractError(RkhsGofError):
    """A precondition of an operation was violated by the caller."""


class DomainError(RkhsGofError):
    """PK parameters outside the admissible domain."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message if index is None else f"{message} (individual {index})")
        self.index = index


class DegenerateEigenvalueError(DomainError):
    """The two disposition eigenvalues coincide; the biexponential formula is undefined."""


class LinearizationError(RkhsGofError):
    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (individual {index})")
        self.index = index


class NumericError(RkhsGofError):
    """A closed-form linear system could not be solved reliably."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class FiniteDifferenceError(RkhsGofError):
    def __init__(self, message: str, component: int):
        super().__init__(f"{message} (component {component})")
        self.component = component


class CalibrationError(RkhsGofError):
    """Too many Monte Carlo replicates failed to produce a statistic."""

    def __init__(self, n_failed: int, n_total: int):
        super().__init__(f"{n_failed} of {n_total} Monte Carlo replicates failed")
        self.n_failed = n_failed
        self.n_total = n_total


class FitFailedError(RkhsGofError):
    """An estimator raised or ended with a non-finite objective."""
