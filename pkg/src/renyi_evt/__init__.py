"""Extreme value statistics of the map x -> beta*x mod 1 for integer beta >= 2."""

__version__ = "0.1.0"

from .config import Budget, BudgetExceeded, ConsistencyError, MapParams, PrecisionError  # noqa: E402

__all__ = ["Budget", "BudgetExceeded", "ConsistencyError", "MapParams", "PrecisionError", "__version__"]
