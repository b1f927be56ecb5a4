"""Derivation-based Riemannian geometry on matrix algebras and
matrix-valued function algebras: connections, curvature, torsion, and
Einstein action functionals, with a critical-point search for the
four-dimensional matrix model and a discretized-torus model that splits
into classical and algebraic parts.
"""

__version__ = "0.1.0"

from .errors import (DegenerateBasisError, DegenerateMetricError,
                     InvalidDimensionError)

__all__ = [
    "DegenerateBasisError",
    "DegenerateMetricError",
    "InvalidDimensionError",
    "__version__",
]
