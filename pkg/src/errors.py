"""
Exceptions for Sparse Walsh-Hadamard Recovery
==============================================
One hierarchy for every failure the library reports.
"""


class SparseWHTError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(SparseWHTError, ValueError):
    """Operands disagree on a dimension (vector length, matrix shape, field degree)."""


class UnsupportedParametersError(SparseWHTError):
    """Parameters are valid in principle but outside what this build supports."""


class CertificationError(SparseWHTError):
    """A random condenser family could not be certified within the retry budget."""


class BudgetExceededError(SparseWHTError):
    """An exhaustive check would enumerate more objects than the configured budget."""


class PlanViolationError(SparseWHTError):
    """A spectral query fell outside the plan the oracle was armed with."""


class SketchError(SparseWHTError):
    """A sketch is inconsistent with its condenser or fails a consistency check."""


class FileFormatError(SparseWHTError):
    """A signal, sketch or condenser file could not be parsed."""
