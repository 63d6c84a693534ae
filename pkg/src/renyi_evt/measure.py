"""Exact Lebesgue measure on finite unions of half-open rational intervals in [0, 1).

All endpoints in an :class:`IntervalSet` share one positive integer denominator,
so set operations reduce to integer sweeps. Values leave the module as
:class:`fractions.Fraction`.

The exceedance sets of the map ``f(x) = beta*x mod 1`` are

    E_i = {x : f^i(x) > 1 - u},  u = beta**-k,

which is the union of the ``beta**i`` intervals ``[(j - u)/beta**i, j/beta**i)``,
``j = 1..beta**i``. Boundary points carry no measure, so the closed-left
convention is used throughout.
"""
from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .config import DEFAULT_BUDGET, Budget, ConsistencyError, MapParams


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (0 <= lo < hi <= 1):
            raise ValueError(f"need 0 <= lo < hi <= 1, got [{lo}, {hi})")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _coalesce(pairs: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Merge a lo-sorted stream of integer intervals into canonical form."""
    out: list[tuple[int, int]] = []
    for lo, hi in pairs:
        if lo >= hi:
            continue
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


class IntervalSet:
    """Finite disjoint union of half-open intervals ``[lo, hi)`` inside [0, 1).

    Stored as integer endpoint pairs over a shared denominator; always sorted,
    disjoint and maximally merged.
    """

    __slots__ = ("den", "pairs")

    def __init__(self, den: int, pairs: Sequence[tuple[int, int]], *, canonical: bool = False):
        if den <= 0:
            raise ValueError("denominator must be positive")
        self.den = den
        if canonical:
            self.pairs = list(pairs)
        else:
            for lo, hi in pairs:
                if lo < 0 or hi > den:
                    raise ValueError("interval outside [0, 1)")
            self.pairs = _coalesce(sorted(pairs))

    # -- construction -------------------------------------------------
    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(1, [], canonical=True)

    @classmethod
    def full(cls) -> "IntervalSet":
        return cls(1, [(0, 1)], canonical=True)

    @classmethod
    def from_intervals(cls, intervals: Iterable[Interval | tuple]) -> "IntervalSet":
        ivs = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals]
        den = 1
        for iv in ivs:
            den = _lcm(den, _lcm(iv.lo.denominator, iv.hi.denominator))
        pairs = [
            (iv.lo.numerator * (den // iv.lo.denominator), iv.hi.numerator * (den // iv.hi.denominator))
            for iv in ivs
        ]
        return cls(den, pairs)

    # -- views --------------------------------------------------------
    @property
    def intervals(self) -> list[Interval]:
        return [Interval(Fraction(lo, self.den), Fraction(hi, self.den)) for lo, hi in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)

    def __iter__(self):
        return iter(self.intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{iv.lo}, {iv.hi})" for iv in self.intervals[:6])
        more = f", ... ({len(self)} total)" if len(self) > 6 else ""
        return f"IntervalSet({{{body}{more}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        if len(self.pairs) != len(other.pairs):
            return False
        a, b = self.den, other.den
        return all(
            lo * b == olo * a and hi * b == ohi * a
            for (lo, hi), (olo, ohi) in zip(self.pairs, other.pairs)
        )

    def __hash__(self):
        return hash(tuple(self.intervals))

    def measure(self) -> Fraction:
        return Fraction(sum(hi - lo for lo, hi in self.pairs), self.den)

    def is_canonical(self) -> bool:
        prev_hi = -1
        for lo, hi in self.pairs:
            if not (0 <= lo < hi <= self.den) or lo <= prev_hi:
                return False
            prev_hi = hi
        return True

    def canonicalize(self) -> "IntervalSet":
        return IntervalSet(self.den, self.pairs)

    def rescaled(self, den: int) -> list[tuple[int, int]]:
        """Endpoint numerators over ``den``, which must be a multiple of ``self.den``."""
        if den % self.den:
            raise ValueError("target denominator must be a multiple of the current one")
        m = den // self.den
        if m == 1:
            return self.pairs
        return [(lo * m, hi * m) for lo, hi in self.pairs]

    # -- algebra ------------------------------------------------------
    def union(self, other: "IntervalSet") -> "IntervalSet":
        den = _lcm(self.den, other.den)
        merged = heapq.merge(self.rescaled(den), other.rescaled(den))
        return IntervalSet(den, _coalesce(merged), canonical=True)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        den = _lcm(self.den, other.den)
        a, b = self.rescaled(den), other.rescaled(den)
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(den, out, canonical=True)

    def complement(self) -> "IntervalSet":
        out = []
        prev = 0
        for lo, hi in self.pairs:
            if lo > prev:
                out.append((prev, lo))
            prev = hi
        if prev < self.den:
            out.append((prev, self.den))
        return IntervalSet(self.den, out, canonical=True)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersect(other.complement())

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersect(other)

    def __invert__(self):
        return self.complement()

    def contains_pair(self, lo: int, hi: int, den: int) -> bool:
        """True when ``[lo/den, hi/den)`` lies inside a single component of the set."""
        # compare lo/den against self endpoints without rescaling the whole set
        idx = bisect.bisect_right(self.pairs, (lo * self.den // den, float("inf"))) - 1
        for cand in (idx, idx + 1):
            if 0 <= cand < len(self.pairs):
                slo, shi = self.pairs[cand]
                if slo * den <= lo * self.den and hi * self.den <= shi * den:
                    return True
        return False

    def meets_pair(self, lo: int, hi: int, den: int) -> bool:
        """True when ``[lo/den, hi/den)`` has positive-measure overlap with the set."""
        idx = bisect.bisect_right(self.pairs, (lo * self.den // den, float("inf"))) - 1
        for cand in (idx, idx + 1):
            if 0 <= cand < len(self.pairs):
                slo, shi = self.pairs[cand]
                if max(slo * den, lo * self.den) < min(shi * den, hi * self.den):
                    return True
        return False


def set_algebra(a: IntervalSet, b: IntervalSet | None, op: str):
    """Dispatch ``union``, ``intersect``, ``complement`` (of ``a``) or ``measure`` (of ``a``)."""
    if op == "union":
        return a.union(b)
    if op == "intersect":
        return a.intersect(b)
    if op in ("complement", "complement-of-a"):
        return a.complement()
    if op == "measure":
        return a.measure()
    raise ValueError(f"unknown set operation {op!r}")


def preimage(params: MapParams, a: IntervalSet) -> IntervalSet:
    """``f^{-1}(a)`` for ``f(x) = beta*x mod 1``: one scaled copy of ``a`` per branch."""
    beta = params.beta
    den = a.den * beta
    pairs = [(j * a.den + lo, j * a.den + hi) for j in range(beta) for lo, hi in a.pairs]
    return IntervalSet(den, _coalesce(pairs), canonical=True)


def _raw_exceedance_pairs(
    params: MapParams, i: int, window: tuple[Fraction, Fraction] | None, budget: Budget
) -> tuple[int, list[tuple[int, int]]]:
    """Integer endpoints, over ``beta**(i+k)``, of the uncoalesced subintervals of E_i.

    With ``window=(a, b)`` only the subintervals meeting ``[a, b)`` are built (and clipped).
    """
    if i < 0:
        raise ValueError("iterate index must be >= 0")
    beta, k = params.beta, params.k
    scale = beta**k
    den = beta ** (i + k)
    n_total = beta**i
    if window is None:
        j_lo, j_hi = 1, n_total
    else:
        a, b = Fraction(window[0]), Fraction(window[1])
        # subinterval j is [(j*scale - 1)/den, j*scale/den); meets [a, b) iff j/beta^i > a and (j - u)/beta^i < b
        j_lo = max(1, (a * n_total).__floor__() + 1)
        j_hi = min(n_total, ((b * n_total + params.u)).__ceil__() - 1)
    count = max(0, j_hi - j_lo + 1)
    budget.check_intervals(count, f"exceedance set E_{i} with beta^{i}={n_total} subintervals")
    pairs = [(j * scale - 1, j * scale) for j in range(j_lo, j_hi + 1)]
    if window is not None and pairs:
        wlo = a.numerator * (den // a.denominator) if den % a.denominator == 0 else None
        if wlo is None or den % b.denominator:
            # window not representable on this grid: fall back to exact intersection
            clipped = IntervalSet(den, pairs, canonical=True).intersect(IntervalSet.from_intervals([(a, b)]))
            return clipped.den, clipped.pairs
        whi = b.numerator * (den // b.denominator)
        pairs = [(max(lo, wlo), min(hi, whi)) for lo, hi in pairs]
        pairs = [(lo, hi) for lo, hi in pairs if lo < hi]
    return den, pairs


def exceedance_set(
    params: MapParams,
    i: int,
    budget: Budget = DEFAULT_BUDGET,
    window: tuple[Fraction, Fraction] | None = None,
) -> IntervalSet:
    """E_i as a canonical :class:`IntervalSet`, optionally clipped to ``window``."""
    den, pairs = _raw_exceedance_pairs(params, i, window, budget)
    return IntervalSet(den, _coalesce(pairs), canonical=True)


def _top_window(params: MapParams) -> tuple[Fraction, Fraction]:
    return (1 - params.u, Fraction(1))


def exceedance_union_measures(params: MapParams, n_max: int, budget: Budget = DEFAULT_BUDGET) -> list[Fraction]:
    """``[B_1, ..., B_{n_max}]`` with ``B_n = Leb(E_0 u ... u E_{n-1})``, by set algebra only."""
    if n_max < 1:
        raise ValueError("n must be >= 1")
    budget.check_intervals(params.beta ** (n_max - 1), f"exceedance set E_{n_max - 1}")
    acc = IntervalSet.empty()
    out = []
    for i in range(n_max):
        acc = acc.union(exceedance_set(params, i, budget))
        out.append(acc.measure())
    return out


def exceedance_union_measure(params: MapParams, n: int, budget: Budget = DEFAULT_BUDGET) -> Fraction:
    return exceedance_union_measures(params, n, budget)[-1]


def new_subinterval_counts(params: MapParams, n_max: int, budget: Budget = DEFAULT_BUDGET) -> list[int]:
    """For ``n = 2..n_max``: how many subintervals of E_{n-1} are new relative to E_0 u ... u E_{n-2}.

    Every subinterval must be either disjoint from or contained in the earlier
    union; anything else raises :class:`ConsistencyError`.
    """
    budget.check_intervals(params.beta ** max(0, n_max - 1), f"exceedance set E_{n_max - 1}")
    acc = exceedance_set(params, 0, budget)
    counts = []
    for i in range(1, n_max):
        den, pairs = _raw_exceedance_pairs(params, i, None, budget)
        new = 0
        for lo, hi in pairs:
            if acc.contains_pair(lo, hi, den):
                continue
            if acc.meets_pair(lo, hi, den):
                raise ConsistencyError(f"subinterval [{lo}/{den}, {hi}/{den}) of E_{i} partially overlaps earlier sets")
            new += 1
        counts.append(new)
        acc = acc.union(IntervalSet(den, _coalesce(pairs), canonical=True))
    return counts


def joint_exceedance_measure(params: MapParams, j: int, budget: Budget = DEFAULT_BUDGET) -> Fraction:
    """``Leb(E_0 n E_j) = P(X_0 > 1-u, X_j > 1-u)``, built only inside E_0."""
    if j < 1:
        raise ValueError("lag j must be >= 1")
    e0 = exceedance_set(params, 0, budget)
    ej = exceedance_set(params, j, budget, window=_top_window(params))
    return e0.intersect(ej).measure()


def cluster_event_set(params: MapParams, q: int, budget: Budget = DEFAULT_BUDGET) -> IntervalSet:
    """``E_0 n ... n E_{q-1} n (complement of E_q)``: exactly q leading exceedances."""
    if q < 1:
        raise ValueError("cluster size q must be >= 1")
    win = _top_window(params)
    acc = exceedance_set(params, 0, budget)
    for i in range(1, q):
        acc = acc.intersect(exceedance_set(params, i, budget, window=win))
    return acc.intersect(exceedance_set(params, q, budget, window=win).complement())


def cluster_event_measure(params: MapParams, q: int, budget: Budget = DEFAULT_BUDGET) -> Fraction:
    return cluster_event_set(params, q, budget).measure()
