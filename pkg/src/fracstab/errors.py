"""Exception hierarchy shared by all modules.

Input problems derive from :class:`ValidationError` (a :class:`ValueError`),
numerical failures from :class:`NumericalError` (an :class:`ArithmeticError`).
The CLI maps the two families onto distinct exit codes.
"""

from __future__ import annotations


class FracStabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FracStabError, ValueError):
    """An input violates a documented invariant.

    ``field`` names the offending input (e.g. ``"taus[0]"``) when known.
    """

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class InvalidOrder(ValidationError):
    pass


class EmptyMatrix(ValidationError):
    pass


class EmptyVector(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotNondecreasing(ValidationError):
    pass


class InvalidHorizon(ValidationError):
    pass


class HypothesisViolation(ValidationError):
    pass


class ParseError(ValidationError):
    """A system file could not be read as structured text."""

    def __init__(
        self, message: str, line: int | None = None, field: str | None = None
    ) -> None:
        super().__init__(message, field=field)
        self.line = line


class NumericalError(FracStabError, ArithmeticError):
    pass


class OverflowRisk(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class UnstableBlowup(NumericalError):
    pass


class SingularQuadrature(NumericalError):
    pass
