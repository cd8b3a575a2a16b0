"""Exceptions raised across hyperjac.

Every error carries the exit code the command line reports for it, so the
library never has to know about the CLI.
"""

from typing import Optional

__all__ = [
    "HyperjacError",
    "DomainError",
    "ConfigError",
    "DataError",
    "ResourceError",
    "BudgetError",
    "ResolutionError",
    "VerificationError",
]


class HyperjacError(Exception):
    """Base class for all hyperjac errors."""

    exit_code: int = 1


class DomainError(HyperjacError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigError(HyperjacError):
    """Invalid configuration or an unmet hypothesis of a construction."""

    exit_code = 2


class DataError(HyperjacError):
    """Measured data unusable for the requested computation."""

    exit_code = 2


class ResourceError(HyperjacError):
    """Computation refused because it exceeds a configured resource."""

    exit_code = 3


class BudgetError(ResourceError):
    """Permutation-term count above the configured budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"determinant needs {required} permutation terms, budget is {budget} "
            f"(raise it with HYPERJAC_BUDGET or an explicit budget argument)"
        )


class ResolutionError(HyperjacError):
    """Quadrature resolution guard violated."""

    exit_code = 3

    def __init__(self, required_nodes: int, available_nodes: int, axis: Optional[int] = None):
        self.required_nodes = required_nodes
        self.available_nodes = available_nodes
        self.axis = axis
        where = f" on axis {axis}" if axis is not None else ""
        super().__init__(
            f"quadrature needs at least {required_nodes} nodes{where}, "
            f"spec provides {available_nodes}"
        )


class VerificationError(HyperjacError):
    """An identity check or a rate verdict failed."""

    exit_code = 1
