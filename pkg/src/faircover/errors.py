"""Semantic exception hierarchy and the degenerate-portfolio warning."""

from __future__ import annotations


class FaircoverError(Exception):
    """Base class for all faircover errors."""


class NonPositiveProbability(FaircoverError):
    """An outcome probability is zero or negative."""


class ProbabilityMassMismatch(FaircoverError):
    """Probabilities do not sum to one within tolerance."""


class SpaceMismatch(FaircoverError):
    """Operands live on different probability spaces."""


class DomainError(FaircoverError):
    """Argument outside the mathematical domain of an operation."""


class ExhaustionLimitExceeded(FaircoverError):
    """Exhaustive enumeration would exceed the configured cap."""


class NegativeLiability(FaircoverError):
    """A loss variable has a negative component."""


class NotASubgradient(FaircoverError):
    """Supplied scenario measure does not attain the valuation."""


class DegeneratePortfolio(FaircoverError):
    """Portfolio admits no default, so benefit shares are undetermined."""


class DegenerateState(FaircoverError):
    """State variable never exceeds the capital level."""


class NotAdmissibleStatePayoff(FaircoverError):
    """State payoff violates the admissibility constraints for its coalition."""


class InconsistentRepresentation(FaircoverError):
    """State payoff cannot be written with a single benefit weight."""


class DimensionMismatch(FaircoverError):
    """Supplied override has the wrong shape for the portfolio."""


class InputParseError(FaircoverError):
    """Input file is not syntactically valid."""


class ValidationError(FaircoverError):
    """Input file is well-formed but semantically invalid.

    ``field`` names the offending entry.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegeneratePortfolioWarning(UserWarning):
    """Emitted when a portfolio admits no default state."""
