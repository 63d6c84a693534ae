"""Closed forms for the partial-maximum law of the map x -> beta*x mod 1.

With ``n_k = floor(beta**k * lam)`` and threshold ``1 - beta**-k``,

    P(M_{n_k} <= 1 - beta**-k)  ->  exp(-theta * lam),   theta = (beta - 1)/beta.

Three routes produce the finite-k probability: exact set algebra (or the
union-measure recursion once the interval count is out of reach), the
Fibonacci link, and the Binet sum over the roots of p_k. Also here: the lower
bound showing the anti-clustering condition fails, and the exact cluster-size
law.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp

from .config import DEFAULT_BUDGET, DEFAULT_PRECISION_BITS, Budget, MapParams, PrecisionError
from .measure import cluster_event_measure, exceedance_union_measure, joint_exceedance_measure
from .recurrence import FibTable, table
from .spectral import RootSet, _gap_bits, all_roots

# auto mode of the exact route switches from intervals to the recursion past this many subintervals
INTERVAL_ROUTE_LIMIT = 2**16
BINET_RTOL = 1e-9


def as_fraction(lam) -> Fraction:
    """Exact rational value of ``lam``; floats convert exactly, strings as written."""
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    return lam


def n_of_k(beta: int, k: int, lam) -> int:
    n = (Fraction(beta) ** k * as_fraction(lam)).__floor__()
    if n < 1:
        raise ValueError(f"n_k = floor({beta}^{k} * {lam}) = {n} < 1")
    return n


def theta(beta: int) -> Fraction:
    return Fraction(beta - 1, beta)


def evt_limit(beta: int, lam, precision: int = DEFAULT_PRECISION_BITS):
    lam = as_fraction(lam)
    with mp.workprec(precision):
        th = theta(beta) * lam
        return mpmath.exp(-mpmath.mpf(th.numerator) / th.denominator)


def _mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


# -- Binet ------------------------------------------------------------

@dataclass
class BinetCoeffs:
    params: MapParams
    roots: RootSet
    weights: list  # mpc, aligned with roots.roots
    precision: int

    @property
    def dominant_weight(self):
        return self.weights[0].real


def _workprec(rs: RootSet) -> int:
    return rs.precision + _gap_bits(rs.params)


def binet_coefficients(params: MapParams, precision: int = DEFAULT_PRECISION_BITS, budget: Budget = DEFAULT_BUDGET) -> BinetCoeffs:
    """Weights ``(r - 1) / (beta + (k+1)(r - beta))`` for every root r of p_k."""
    rs = all_roots(params, precision, budget)
    beta, k = params.beta, params.k
    with mp.workprec(_workprec(rs)):
        floor_den = abs(beta + (k + 1) * (1 - beta))
        weights = []
        for i, r in enumerate(rs.roots):
            den = beta + (k + 1) * (r - beta)
            if i > 0 and abs(den) < floor_den:
                raise PrecisionError(f"weight denominator {den} below {floor_den} for root {r}")
            weights.append((r - 1) / den)
    return BinetCoeffs(params, rs, weights, precision)


def binet_fib(coeffs: BinetCoeffs, n: int, rtol: float = BINET_RTOL):
    """F_n as ``sum_j w_j r_j**(n-1)``; the imaginary residue must be negligible."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with mp.workprec(_workprec(coeffs.roots)):
        total = mpmath.fsum(w * r ** (n - 1) for w, r in zip(coeffs.weights, coeffs.roots.roots))
        total = mpmath.mpc(total)
        if abs(total.imag) > rtol * max(1, abs(total.real)):
            raise PrecisionError(f"Binet sum has imaginary part {total.imag}")
        return +total.real


@dataclass
class SimplifiedBinetReport:
    params: MapParams
    n_lo: int
    n_hi: int
    mismatches: list[int]
    first_unbroken: int | None  # smallest n0 with agreement on n0..n_hi
    min_margin: float  # min distance of w r^(n-1) + 1/2 from an integer, over agreeing n

    @property
    def all_agree(self) -> bool:
        return not self.mismatches


def simplified_binet_check(params: MapParams, n_range: tuple[int, int], precision: int = DEFAULT_PRECISION_BITS) -> SimplifiedBinetReport:
    """Compare ``floor(w_1 r_1**(n-1) + 1/2)`` (dominant term only) with exact F_n on ``n_range`` (inclusive)."""
    params.require_k2()
    n_lo, n_hi = n_range
    coeffs = binet_coefficients(params, precision)
    tab = table(params)
    r1 = coeffs.roots.dominant
    mism = []
    margin = None
    with mp.workprec(_workprec(coeffs.roots)):
        w1 = coeffs.dominant_weight
        for n in range(n_lo, n_hi + 1):
            v = w1 * r1 ** (n - 1) + mpmath.mpf(1) / 2
            fl = int(mpmath.floor(v))
            if fl != tab.fib(n):
                mism.append(n)
            else:
                frac = v - fl
                m = float(min(frac, 1 - frac))
                margin = m if margin is None else min(margin, m)
    first = n_lo if not mism else (mism[-1] + 1 if mism[-1] < n_hi else None)
    return SimplifiedBinetReport(params, n_lo, n_hi, mism, first, margin if margin is not None else 0.0)


# -- finite-k probability ----------------------------------------------

def evt_probability(
    beta: int,
    lam,
    k: int,
    route: str = "fib",
    budget: Budget = DEFAULT_BUDGET,
    precision: int = DEFAULT_PRECISION_BITS,
    exact_method: str = "auto",
    coeffs: BinetCoeffs | None = None,
):
    """``P(M_{n_k} <= 1 - beta**-k)`` by one route.

    ``exact`` returns a Fraction from interval algebra (``exact_method='intervals'``)
    or the union-measure recursion (``'haiman'``); ``'auto'`` picks intervals
    while ``beta**(n_k-1)`` is small. ``fib`` returns a Fraction via F_{n+k+1};
    ``binet`` returns an mpf.
    """
    params = MapParams(beta, k)
    n = n_of_k(beta, k, lam)
    if route == "exact":
        method = exact_method
        if method == "auto":
            method = "intervals" if beta ** (n - 1) <= min(INTERVAL_ROUTE_LIMIT, budget.max_intervals) else "haiman"
        if method == "intervals":
            return 1 - exceedance_union_measure(params, n, budget)
        if method == "haiman":
            return 1 - FibTable(params).haiman_b(n)
        raise ValueError(f"unknown exact method {exact_method!r}")
    if route == "fib":
        return FibTable(params).max_prob(n)
    if route == "binet":
        terms = binet_terms(params, n, precision, budget, coeffs)
        with mp.workprec(terms.workprec):
            return terms.scale * mpmath.fsum([terms.dominant] + terms.others).real
    raise ValueError(f"unknown route {route!r}")


@dataclass
class BinetTerms:
    """``a_i(k) = w_i (r_i / beta)**(n_k + k)`` and the prefactor beta/(beta-1)."""

    dominant: object
    others: list
    scale: object
    workprec: int


def binet_terms(params: MapParams, n: int, precision: int = DEFAULT_PRECISION_BITS, budget: Budget = DEFAULT_BUDGET, coeffs: BinetCoeffs | None = None) -> BinetTerms:
    if coeffs is None:
        coeffs = binet_coefficients(params, precision, budget)
    beta, k = params.beta, params.k
    wp = _workprec(coeffs.roots)
    with mp.workprec(wp):
        e = n + k
        a = [w * (r / beta) ** e for w, r in zip(coeffs.weights, coeffs.roots.roots)]
        scale = mpmath.mpf(beta) / (beta - 1)
    return BinetTerms(a[0], a[1:], scale, wp)


def tail_bound(beta: int, k: int, n: int, precision: int = DEFAULT_PRECISION_BITS):
    """``2(k-1) / (|beta + (k+1)(1-beta)| * beta**(n+k))`` bounding the non-dominant terms."""
    with mp.workprec(precision):
        return mpmath.mpf(2 * (k - 1)) / (abs(beta + (k + 1) * (1 - beta)) * mpmath.mpf(beta) ** (n + k))


@dataclass
class ConvergenceRecord:
    beta: int
    lam: Fraction
    k: int
    n_k: int
    p_exact: Fraction | None
    exact_method: str | None
    p_fib: Fraction
    p_binet: object
    limit: object
    abs_err: object  # |p_fib - limit|
    dominant_term: object  # (beta/(beta-1)) a_1(k)
    tail: object  # (beta/(beta-1)) |sum_{i>=2} a_i(k)|, summed directly
    tail_bound: object
    timings: dict = field(default_factory=dict)

    @property
    def routes_agree(self) -> bool:
        return self.p_exact is None or self.p_exact == self.p_fib


def convergence_record(
    beta: int,
    lam,
    k: int,
    budget: Budget = DEFAULT_BUDGET,
    precision: int = DEFAULT_PRECISION_BITS,
    exact_method: str = "auto",
) -> ConvergenceRecord:
    params = MapParams(beta, k)
    params.require_k2()
    lam = as_fraction(lam)
    n = n_of_k(beta, k, lam)
    timings = {}

    t0 = time.perf_counter()
    p_fib = evt_probability(beta, lam, k, "fib", budget, precision)
    timings["fib"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if exact_method == "none":
        p_exact, method = None, None
    else:
        method = exact_method
        if method == "auto":
            method = "intervals" if beta ** (n - 1) <= min(INTERVAL_ROUTE_LIMIT, budget.max_intervals) else "haiman"
        p_exact = evt_probability(beta, lam, k, "exact", budget, precision, exact_method=method)
    timings["exact"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    terms = binet_terms(params, n, precision, budget)
    with mp.workprec(terms.workprec):
        p_binet = +(terms.scale * mpmath.fsum([terms.dominant] + terms.others).real)
        dom = +(terms.scale * terms.dominant.real)
        tail = terms.scale * abs(mpmath.fsum(terms.others)) if terms.others else mpmath.mpf(0)
        limit = evt_limit(beta, lam, terms.workprec)
        err = abs(_mpf(p_fib) - limit)
    timings["binet"] = time.perf_counter() - t0
    return ConvergenceRecord(
        beta=beta,
        lam=lam,
        k=k,
        n_k=n,
        p_exact=p_exact,
        exact_method=method,
        p_fib=p_fib,
        p_binet=p_binet,
        limit=limit,
        abs_err=err,
        dominant_term=dom,
        tail=tail,
        tail_bound=tail_bound(beta, k, n, terms.workprec),
        timings=timings,
    )


@dataclass(frozen=True)
class EvtParams:
    beta: int
    lam: Fraction
    k_min: int
    k_max: int

    def __post_init__(self):
        object.__setattr__(self, "lam", as_fraction(self.lam))
        if self.k_min < 2 or self.k_max < self.k_min:
            raise ValueError("need 2 <= k_min <= k_max")
        n_of_k(self.beta, self.k_min, self.lam)


def convergence_table(ep: EvtParams, budget: Budget = DEFAULT_BUDGET, precision: int = DEFAULT_PRECISION_BITS, exact_method: str = "auto") -> list[ConvergenceRecord]:
    return [
        convergence_record(ep.beta, ep.lam, k, budget, precision, exact_method)
        for k in range(ep.k_min, ep.k_max + 1)
    ]


# -- anti-clustering condition -----------------------------------------

EXACT_LAG_INTERVALS = 2**12


@dataclass
class DPrimeResult:
    beta: int
    lam: Fraction
    k: int
    n: int
    lags: int  # floor(n / k)
    exact_lags: int  # lags with exact joint measures; the rest use the inclusion bound
    value: Fraction  # certified lower bound on n * sum_j P(X_0 > u_n, X_j > u_n)
    lower_bound: Fraction  # n (1-u_n)(1 - beta^-lags)/(beta-1)
    limit: Fraction  # lam / (beta - 1)


def dprime_sum(beta: int, lam, k: int, j_max: int | None = None, budget: Budget = DEFAULT_BUDGET) -> DPrimeResult:
    """Lower bound on ``n * sum_{j=1}^{floor(n/k)} P(X_0 > u_n, X_j > u_n)`` at ``u_n = 1 - beta**-k``, ``n = n_k``.

    Lags up to ``j_max`` (default: while the clipped E_j needs at most 4096
    subintervals) use exact joint measures; the remaining lags use
    ``(1 - u_n) / beta**j``, which never exceeds the true value.
    """
    params = MapParams(beta, k)
    lam = as_fraction(lam)
    n = n_of_k(beta, k, lam)
    u = params.u
    lags = n // k
    if j_max is None:
        j_max = 0
        while j_max < lags and beta ** max(0, j_max + 1 - k) <= EXACT_LAG_INTERVALS:
            j_max += 1
    j_max = min(j_max, lags)
    total = Fraction(0)
    for j in range(1, lags + 1):
        if j <= j_max:
            total += joint_exceedance_measure(params, j, budget)
        else:
            total += u / beta**j
    return DPrimeResult(
        beta=beta,
        lam=lam,
        k=k,
        n=n,
        lags=lags,
        exact_lags=j_max,
        value=n * total,
        lower_bound=n * u * (1 - Fraction(1, beta**lags)) / (beta - 1),
        limit=lam / (beta - 1),
    )


# -- cluster law -------------------------------------------------------

@dataclass
class ClusterLaw:
    beta: int
    k: int
    probs: dict[int, Fraction]  # q -> P(cluster size q | X_0 exceeds)
    truncated_mass: Fraction
    truncated_mean: Fraction
    mean: Fraction  # beta/(beta-1), the full geometric series
    theta: Fraction


def cluster_stats_exact(beta: int, q_max: int, k: int = 2, budget: Budget = DEFAULT_BUDGET) -> ClusterLaw:
    """Conditional cluster-size probabilities from set algebra, q = 1..q_max."""
    params = MapParams(beta, k)
    u = params.u
    probs = {q: cluster_event_measure(params, q, budget) / u for q in range(1, q_max + 1)}
    mean = Fraction(beta, beta - 1)
    return ClusterLaw(
        beta=beta,
        k=k,
        probs=probs,
        truncated_mass=sum(probs.values()),
        truncated_mean=sum(q * p for q, p in probs.items()),
        mean=mean,
        theta=1 / mean,
    )
