from __future__ import annotations


class BitCanvasError(Exception):
    """Base class for every error raised by the bit-model library."""


class DyadicSyntaxError(BitCanvasError, ValueError):
    """Text does not match the dyadic literal grammar."""


class NotDyadicError(BitCanvasError, ValueError):
    """A well-formed number whose value is not of the form m / 2^k."""


class ExponentOverflowError(BitCanvasError, OverflowError):
    """A dyadic exponent left the supported range."""


class DomainViolation(BitCanvasError):
    """An oracle witnessed a point outside the domain of a function."""


class SeparationError(BitCanvasError):
    """A divisor could not be separated from zero within the probe budget."""


class RangeContainmentError(BitCanvasError):
    """The certified range of an inner machine leaves the outer machine's domain."""


class SampleBudgetExceeded(BitCanvasError):
    """Graph sampling ran out of samples before reaching the tolerance."""


class PrecisionBudgetExceeded(BitCanvasError):
    """A precision was requested beyond what a converter was built for."""


class LevelCapExceeded(BitCanvasError):
    """A Koch level beyond the configured cap was requested."""


class EmptySetError(BitCanvasError):
    """An operation needs a nonempty pixel set."""


class ExpressionError(BitCanvasError):
    """The eval expression could not be parsed or compiled."""


class JobValidationError(BitCanvasError):
    """A render job is inconsistent (window alignment, parameters, set id)."""


class InvariantViolation(BitCanvasError):
    """A self-check suite found a counterexample to a guaranteed property."""
