"""Dynamics of loxodromic automorphisms of the Markov surfaces
x^2 + y^2 + z^2 = xyz + D."""

from .errors import (
    BudgetExceeded,
    DegenerateMatrix,
    EigenvalueMismatch,
    MarkovDynError,
    NotAdapted,
    NotAdjacent,
    NotFixed,
    NotLoxodromic,
    NotRational,
    PrecisionExhausted,
    SingularPoint,
)
from .mcg import AutomorphismWord, Matrix2, classify, dynamical_degree, word_to_matrix
from .surface import SurfacePoint, apply, orbit

__all__ = [
    "AutomorphismWord",
    "BudgetExceeded",
    "DegenerateMatrix",
    "EigenvalueMismatch",
    "MarkovDynError",
    "Matrix2",
    "NotAdapted",
    "NotAdjacent",
    "NotFixed",
    "NotLoxodromic",
    "NotRational",
    "PrecisionExhausted",
    "SingularPoint",
    "SurfacePoint",
    "apply",
    "classify",
    "dynamical_degree",
    "orbit",
    "word_to_matrix",
]
