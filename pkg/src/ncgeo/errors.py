"""Shared exception types."""


class InvalidDimensionError(ValueError):
    """An input has a dimension or shape the operation cannot accept."""


class DegenerateBasisError(ValueError):
    """A matrix basis is linearly dependent, ill-conditioned, or does not
    close under commutators."""


class DegenerateMetricError(ValueError):
    """A metric is singular or too ill-conditioned to invert reliably."""
