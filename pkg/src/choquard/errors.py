"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DomainError(ValueError):
    """Parameters outside the admissible domain of an operation."""


class TailDivergence(DomainError):
    """An integral over an unbounded range diverges for the declared envelope."""


class NoDecayClaim(DomainError):
    """No lower decay bound is available for the requested tuple."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class QuadratureFailure(NumericalError):
    pass


class StiffnessFailure(NumericalError):
    pass


class NoAdmissibleMu(Exception):
    """Raised when no amplitude on the search ladder gives a nonnegative residual."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
