"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EkRelaxError(Exception):
    """Base class for library errors."""


class ValidationError(EkRelaxError, ValueError):
    """A parameter or input violates a documented precondition."""


class PoleError(ValidationError):
    """Gamma evaluated at a non-positive integer."""


class SeriesDivergenceError(EkRelaxError, ArithmeticError):
    """Series hit its term cap while terms were still large and not shrinking."""


class SolverError(EkRelaxError, ArithmeticError):
    """Non-finite state or overflow during time stepping."""


class StepUnderflowError(SolverError):
    """The adaptive rule kept asking for steps below the lower clamp."""
