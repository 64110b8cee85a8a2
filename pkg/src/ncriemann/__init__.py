"""Riemann-measurable elements, spectral densities and singular traces."""
from . import algebra, measure, novikov, singular, spectral
from .errors import (
    BudgetError,
    CutError,
    DomainError,
    NCRError,
    NoCutError,
    NoLimitError,
    NoSDDError,
    NotEccentricError,
    PrecisionError,
)

__version__ = "0.1.0"

__all__ = [
    "algebra", "measure", "novikov", "singular", "spectral",
    "BudgetError", "CutError", "DomainError", "NCRError", "NoCutError",
    "NoLimitError", "NoSDDError", "NotEccentricError", "PrecisionError",
]
