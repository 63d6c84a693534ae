"""Shared parameters, resource budgets and error types."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

DEFAULT_MAX_INTERVALS = 2**26
DEFAULT_MAX_STRINGS = 2**24
DEFAULT_MAX_DEGREE = 64
DEFAULT_PRECISION_BITS = 128
MAX_PRECISION_BITS = 1024


class BudgetExceeded(RuntimeError):
    """A construction would exceed its configured resource budget."""

    def __init__(self, what: str, needed: int, limit: int):
        self.what = what
        self.needed = needed
        self.limit = limit
        super().__init__(f"{what}: needs {needed}, budget is {limit}")


class ConsistencyError(RuntimeError):
    """Two routes that must agree exactly did not. Always an implementation bug."""


class PrecisionError(ArithmeticError):
    """A numerical result could not be certified at the requested precision."""


@dataclass(frozen=True)
class Budget:
    max_intervals: int = DEFAULT_MAX_INTERVALS
    max_strings: int = DEFAULT_MAX_STRINGS
    max_degree: int = DEFAULT_MAX_DEGREE

    def check_intervals(self, needed: int, what: str = "interval count") -> None:
        if needed > self.max_intervals:
            raise BudgetExceeded(what, needed, self.max_intervals)

    def check_strings(self, needed: int, what: str = "digit strings") -> None:
        if needed > self.max_strings:
            raise BudgetExceeded(what, needed, self.max_strings)

    def check_degree(self, needed: int) -> None:
        if needed > self.max_degree:
            raise BudgetExceeded("polynomial degree", needed, self.max_degree)

    def with_(self, **kw) -> "Budget":
        return replace(self, **kw)


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class MapParams:
    """Integer base ``beta >= 2`` of the map x -> beta*x mod 1 and threshold exponent ``k >= 1``.

    The exceedance threshold is ``1 - beta**-k``.
    """

    beta: int
    k: int

    def __post_init__(self):
        if not isinstance(self.beta, int) or isinstance(self.beta, bool) or self.beta < 2:
            raise ValueError(f"beta must be an integer >= 2, got {self.beta!r}")
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")

    @property
    def u(self) -> Fraction:
        return Fraction(1, self.beta**self.k)

    def require_k2(self) -> None:
        if self.k < 2:
            raise ValueError(f"this operation needs k >= 2, got k={self.k}")
