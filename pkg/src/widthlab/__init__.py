"""Compressive-sensing laboratory: sparse recovery, NSP/RIP certification,
support packings and two-sided Gelfand width estimates."""

from widthlab.core import (
    best_s_term_error,
    compressible_model_vector,
    hard_threshold,
    lp_quasinorm,
    nonincreasing_rearrangement,
    packing_vector,
    weak_lp_quasinorm,
)
from widthlab.exceptions import (
    BudgetExceededError,
    DomainError,
    OracleSizeError,
    WidthLabError,
)

__version__ = "0.1.0"

__all__ = [
    "best_s_term_error",
    "compressible_model_vector",
    "hard_threshold",
    "lp_quasinorm",
    "nonincreasing_rearrangement",
    "packing_vector",
    "weak_lp_quasinorm",
    "BudgetExceededError",
    "DomainError",
    "OracleSizeError",
    "WidthLabError",
]
