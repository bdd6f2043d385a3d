"""Exception taxonomy.

Every error carries a stable machine-readable ``code`` so the CLI can emit
structured error reports and tests can match on failure modes instead of
message strings.
"""

from __future__ import annotations


class SuperhedgeError(Exception):
    """Base class for all package errors."""

    code = "Error"

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.message = message
        self.details = details


class ValidationError(SuperhedgeError):
    """Input fails a semantic check (normalization, monotonicity, shape)."""

    code = "ValidationError"


class ParseError(ValidationError):
    """Input file is not syntactically valid or fails its schema."""

    code = "ParseError"


class DimensionError(SuperhedgeError):
    """Vector length or ambient dimension mismatch, or dimension cap exceeded."""

    code = "DimensionError"


class DomainError(SuperhedgeError):
    """A sampling grid hit a point where the requested quantity is undefined."""

    code = "DomainError"


class NonInada(SuperhedgeError):
    """Marginal utility does not bracket the requested slope."""

    code = "NonInada"


class NoPositiveRegion(SuperhedgeError):
    """The conjugate never becomes positive and increasing on the search range."""

    code = "NoPositiveRegion"


class PreconditionError(SuperhedgeError):
    """Operation rejected because a documented precondition fails."""

    code = "PreconditionError"


class NoMeasure(SuperhedgeError):
    """The separating-measure polytope is empty (the market has arbitrage)."""

    code = "NoMeasure"


class EmptyMeasureSet(SuperhedgeError):
    """A cone or pricing operation needs a nonempty measure set and got none."""

    code = "EmptyMeasureSet"


class UnboundedPrice(SuperhedgeError):
    """The super-replication program is unbounded below."""

    code = "Unbounded"


class DualityGapError(SuperhedgeError):
    """Primal and dual prices disagree beyond tolerance."""

    code = "DualityGapError"
