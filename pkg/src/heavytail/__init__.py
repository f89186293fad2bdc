"""Tail expansions for heavy-tailed exposures X = AZ with a random matrix A."""

from .errors import (CapacityError, HeavyTailError, InfiniteTauError, UnsupportedModelError,
                     ValidationError)
from .kernels import BACKEND
from .margins import MarginalModel, dependent_pareto, iid_pareto
from .risksets import RiskSet, halfspace_union, rect_union
from .tau import critical_index, order_stat, tau_matrix

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CapacityError", "HeavyTailError", "InfiniteTauError", "MarginalModel",
    "RiskSet", "UnsupportedModelError", "ValidationError", "critical_index", "dependent_pareto",
    "halfspace_union", "iid_pareto", "order_stat", "rect_union", "tau_matrix",
]
