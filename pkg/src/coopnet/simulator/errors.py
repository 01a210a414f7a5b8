"""
Exception hierarchy for the simulator.

Every error derives from CoopnetError and from the builtin it most resembles,
so callers can catch either. The CLI maps ParameterError to exit code 1 and
everything else to exit code 2.
"""


class CoopnetError(Exception):
    """Root of all simulator errors."""


class DomainError(CoopnetError, ValueError):
    """An argument lies outside the domain of a numeric routine."""


class ParameterError(CoopnetError, ValueError):
    """A scenario parameter violates a SystemParams invariant."""


class ConfigParseError(ParameterError):
    """A scenario file line does not follow the `key = value` grammar."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ConfigValidationError(ParameterError):
    """A parsed scenario is syntactically fine but semantically invalid."""


class EnumerationCapError(CoopnetError, RuntimeError):
    """The node-selection space is too large to search exhaustively."""


class FeedbackPatternError(CoopnetError, ValueError):
    """A feedback pattern is malformed or inconsistent with the decoding set."""


class NumericalError(CoopnetError, ArithmeticError):
    """A factorization lost positive definiteness."""


class NonBracketingError(CoopnetError, RuntimeError):
    """A root search could not bracket its target."""


class MonotonicityError(CoopnetError, RuntimeError):
    """Estimated outage probability decreased with rate beyond MC noise."""
