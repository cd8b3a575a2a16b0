"""Cayley hyperdeterminants, hyper-Jacobian minors and fractional Sobolev experiments."""

from .errors import (
    BudgetError,
    ConfigError,
    DataError,
    DomainError,
    HyperjacError,
    ResolutionError,
    ResourceError,
    VerificationError,
)
from .hypermatrix import HyperMatrix, MinorSpec, det_full, det_layer_fold, minor_det
from .multiindex import MultiIndex

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ConfigError",
    "DataError",
    "DomainError",
    "HyperjacError",
    "ResolutionError",
    "ResourceError",
    "VerificationError",
    "HyperMatrix",
    "MinorSpec",
    "MultiIndex",
    "det_full",
    "det_layer_fold",
    "minor_det",
]
