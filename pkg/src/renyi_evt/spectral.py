"""Characteristic polynomial of the rescaled Fibonacci recursion and its roots.

    p_k(x) = x^k - (beta - 1) * (1 + x + ... + x^(k-1))
    q_k(x) = (x - 1) p_k(x) = x^(k+1) - beta x^k + beta - 1

p_k has one root in (1, beta) and k - 1 simple roots strictly inside the unit
circle. Signs at rational points are decided exactly with Fractions; the root
set is refined with Aberth iterations in mpmath and enclosed by Weierstrass
disks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import mpmath
import numpy as np
from mpmath import mp

from .config import (
    DEFAULT_BUDGET,
    DEFAULT_PRECISION_BITS,
    MAX_PRECISION_BITS,
    Budget,
    ConsistencyError,
    MapParams,
    PrecisionError,
)

GUARD_BITS = 24


def coefficients(params: MapParams) -> list[int]:
    """Coefficients of p_k, highest degree first."""
    return [1] + [-(params.beta - 1)] * params.k


def _horner(coeffs, x):
    acc = 0 * x + coeffs[0]
    for c in coeffs[1:]:
        acc = acc * x + c
    return acc


def eval_poly(params: MapParams, x, which: str = "p"):
    """Evaluate p_k or q_k at ``x``.

    Rational input (int/Fraction) gives an exact Fraction. For p_k away from
    x = 1 the geometric-sum closed form ``((beta - x) x^k - (beta - 1)) / (1 - x)`` is used;
    near 1 (or for mpmath intervals) plain Horner is used.
    """
    beta, k = params.beta, params.k
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
    if which == "q":
        return x ** (k + 1) - beta * x**k + (beta - 1)
    if which != "p":
        raise ValueError(f"which must be 'p' or 'q', got {which!r}")
    if isinstance(x, Fraction):
        if x == 1:
            return Fraction(1 - k * (beta - 1))
        return ((beta - x) * x**k - (beta - 1)) / (1 - x)
    if isinstance(x, (mpmath.mpf, mpmath.mpc, float, complex)) and abs(1 - x) >= 0.5:
        return ((beta - x) * x**k - (beta - 1)) / (1 - x)
    return _horner(coefficients(params), x)


def eval_q_derivative(params: MapParams, x):
    beta, k = params.beta, params.k
    return (k + 1) * x**k - k * beta * x ** (k - 1)


def mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man) * Fraction(2) ** exp


def p_sign(params: MapParams, x: Fraction) -> int:
    v = eval_poly(params, Fraction(x))
    return (v > 0) - (v < 0)


@dataclass
class DominantRoot:
    value: mpmath.mpf
    lo: Fraction  # exact rational bracket, p(lo) < 0 < p(hi)
    hi: Fraction
    precision: int


def dominant_root_bracketed(params: MapParams, precision: int = DEFAULT_PRECISION_BITS) -> DominantRoot:
    """The root r in (1, beta) with an exactly certified rational bracket.

    Bisection on the sign of p_k to ~40 bits, Newton on q_k to full precision,
    then an exact sign check on both sides of the result. The root sits about
    beta**-k below beta, so ``k*log2(beta)`` extra bits are carried to keep
    ``precision`` significant bits in that gap.
    """
    params.require_k2()
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    beta = params.beta
    lo, hi = Fraction(1), Fraction(beta)
    if not (p_sign(params, lo) < 0 < p_sign(params, hi)):
        raise ConsistencyError("p_k does not change sign on (1, beta)")
    for _ in range(40):
        mid = (lo + hi) / 2
        if p_sign(params, mid) < 0:
            lo = mid
        else:
            hi = mid
    work = precision + _gap_bits(params)
    with mp.workprec(work + GUARD_BITS):
        x = mpmath.mpf(lo.numerator) / lo.denominator
        tol = mpmath.mpf(2) ** (-(work + 4))
        for _ in range(200):
            step = eval_poly(params, x, "q") / eval_q_derivative(params, x)
            x -= step
            if abs(step) <= tol * x:
                break
        else:
            raise PrecisionError("Newton refinement of the dominant root did not converge")
        # exact certification: sign change across [x - eps, x + eps]
        eps = Fraction(2) ** (-work) * beta
        xf = mpf_to_fraction(x)
        blo, bhi = xf - eps, xf + eps
        if not (p_sign(params, blo) < 0 < p_sign(params, bhi)):
            raise PrecisionError(f"dominant root not certified at {work} bits")
    with mp.workprec(work):
        value = +x
    return DominantRoot(value, blo, bhi, precision)


def _gap_bits(params: MapParams) -> int:
    return int(params.k * np.log2(params.beta)) + 8


def dominant_root(params: MapParams, precision: int = DEFAULT_PRECISION_BITS) -> mpmath.mpf:
    return dominant_root_bracketed(params, precision).value


# -- Newton-step bracket ----------------------------------------------

@dataclass
class NewtonBounds:
    r_min: mpmath.mpf  # display value; exact only when k is even
    r_max: Fraction
    p_at_r_max: Fraction
    r_min_upper: Fraction  # rational upper bound on r_min at which the sign was decided
    r_min_sign: int  # certified sign of p_k(r_min)
    r_min_exact: Fraction | None = None
    certified_bits: int = 0

    @property
    def r_max_sign(self) -> int:
        return (self.p_at_r_max > 0) - (self.p_at_r_max < 0)


def _inv_sqrt_power_bounds(beta: int, k: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= beta**(-k/2) <= hi``."""
    if k % 2 == 0:
        v = Fraction(1, beta ** (k // 2))
        return v, v
    scaled = beta**k * 4**bits
    t = isqrt(scaled)  # t <= 2^bits sqrt(beta^k) < t + 1
    return Fraction(2**bits, t + 1), Fraction(2**bits, t)


def _r_min_of(beta: int, k: int, s: Fraction) -> Fraction:
    return beta - Fraction(beta - 1, beta**k - 1) * (1 + s)


def newton_bounds(params: MapParams, precision: int = DEFAULT_PRECISION_BITS) -> NewtonBounds:
    """``r_max = beta - (beta-1)/(beta^k-1)`` (one Newton step from beta) and the corrected ``r_min``.

    p_k(r_max) is exact. The sign of p_k(r_min) is certified: since p_k < 0 on
    (0, r) and > 0 beyond, p_k(r_min) < 0 follows from p_k(U) < 0 at any
    rational ``U >= r_min``. Enclosure bits double up to the precision cap.
    """
    params.require_k2()
    beta, k = params.beta, params.k
    r_max = beta - Fraction(beta - 1, beta**k - 1)
    p_max = eval_poly(params, r_max)
    bits = precision
    while True:
        s_lo, s_hi = _inv_sqrt_power_bounds(beta, k, bits)
        upper = _r_min_of(beta, k, s_lo)  # r_min decreases in s
        lower = _r_min_of(beta, k, s_hi)
        su, sl = p_sign(params, upper), p_sign(params, lower)
        if su == sl and su != 0:
            sign = su
            break
        if s_lo == s_hi:
            sign = su
            break
        if bits >= MAX_PRECISION_BITS:
            raise PrecisionError(f"sign of p_k(r_min) undecided at {bits} bits for beta={beta}, k={k}")
        bits *= 2
    with mp.workprec(precision + 2 * _gap_bits(params)):
        r_min = mpmath.mpf(beta) - mpmath.mpf(beta - 1) / (mpmath.mpf(beta) ** k - 1) * (
            1 + mpmath.mpf(beta) ** (-mpmath.mpf(k) / 2)
        )
    return NewtonBounds(
        r_min=r_min,
        r_max=r_max,
        p_at_r_max=p_max,
        r_min_upper=upper,
        r_min_sign=sign,
        r_min_exact=upper if s_lo == s_hi else None,
        certified_bits=bits,
    )


@dataclass
class BracketCheck:
    k: int
    p_rmax_positive: bool
    p_rmin_negative: bool
    bracketed: bool  # r_min < dominant < r_max, numerically and via signs

    @property
    def ok(self) -> bool:
        return self.p_rmax_positive and self.p_rmin_negative and self.bracketed


def check_bracket(params: MapParams, precision: int = DEFAULT_PRECISION_BITS) -> BracketCheck:
    """Signs of p_k at r_min/r_max plus a direct comparison with the bracketed dominant root.

    r_max - r is of order beta**(-3k/2); precision doubles until the comparison is decided.
    """
    nb = newton_bounds(params, precision)
    s_lo, s_hi = _inv_sqrt_power_bounds(params.beta, params.k, nb.certified_bits)
    r_min_lower = _r_min_of(params.beta, params.k, s_hi)
    prec = precision
    while True:
        dom = dominant_root_bracketed(params, prec)
        if dom.hi < nb.r_max and nb.r_min_upper < dom.lo:
            numeric = True
            break
        if dom.lo >= nb.r_max or dom.hi <= r_min_lower:
            numeric = False
            break
        if prec >= 4 * MAX_PRECISION_BITS:
            raise PrecisionError(f"cannot order r_min, r, r_max for beta={params.beta}, k={params.k}")
        prec *= 2
    return BracketCheck(
        k=params.k,
        p_rmax_positive=nb.p_at_r_max > 0,
        p_rmin_negative=nb.r_min_sign < 0,
        bracketed=numeric,
    )


def bracket_threshold(beta: int, k_max: int = 64, precision: int = DEFAULT_PRECISION_BITS) -> tuple[int | None, list[BracketCheck]]:
    """Smallest K0 such that the Newton bracket holds for every k in K0..k_max (None if it fails at k_max)."""
    checks = [check_bracket(MapParams(beta, k), precision) for k in range(2, k_max + 1)]
    k0 = None
    for c in reversed(checks):
        if not c.ok:
            break
        k0 = c.k
    return k0, checks


def classical_bound_threshold(k_max: int = 64, precision: int = DEFAULT_PRECISION_BITS) -> int | None:
    """For beta=2: smallest K1 with r_min > 2(1 - 2^-k) for all k in K1..k_max."""
    k1 = None
    for k in range(k_max, 1, -1):
        nb = newton_bounds(MapParams(2, k), precision)
        s_lo, s_hi = _inv_sqrt_power_bounds(2, k, nb.certified_bits)
        r_min_lower = _r_min_of(2, k, s_hi)
        if not r_min_lower > 2 * (1 - Fraction(1, 2**k)):
            break
        k1 = k
    return k1


# -- full root set ----------------------------------------------------

@dataclass
class RootSet:
    params: MapParams
    dominant: mpmath.mpf
    others: list  # mpc, sorted by argument
    residuals: list  # |p_k(z)| for dominant then others
    radii: list  # Weierstrass inclusion radii, same order
    precision: int
    flags: dict = field(default_factory=dict)

    @property
    def roots(self) -> list:
        return [mpmath.mpc(self.dominant)] + list(self.others)

    @property
    def max_other_modulus(self):
        return max((abs(z) for z in self.others), default=mpmath.mpf(0))


def _aberth(coeffs, z, tol, maxiter=500):
    n = len(z)
    dcoeffs = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]
    for _ in range(maxiter):
        biggest = 0
        for i in range(n):
            zi = z[i]
            pv = _horner(coeffs, zi)
            dv = _horner(dcoeffs, zi)
            if pv == 0:
                continue
            ratio = pv / dv
            s = mpmath.fsum(1 / (zi - z[j]) for j in range(n) if j != i)
            w = ratio / (1 - ratio * s)
            z[i] = zi - w
            biggest = max(biggest, abs(w) / max(1, abs(z[i])))
        if biggest < tol:
            return z, True
    return z, False


def _weierstrass_radii(coeffs, z):
    n = len(z)
    out = []
    for i in range(n):
        prod = mpmath.mpf(1)
        for j in range(n):
            if j != i:
                prod *= z[i] - z[j]
        out.append(n * abs(_horner(coeffs, z[i]) / prod))
    return out


def all_roots(
    params: MapParams,
    precision: int = DEFAULT_PRECISION_BITS,
    budget: Budget = DEFAULT_BUDGET,
) -> RootSet:
    """All k roots of p_k, certified by disjoint Weierstrass disks.

    Precision doubles (up to 1024 bits) until the disks are disjoint and the
    dominant root agrees with its exactly bracketed value.
    """
    params.require_k2()
    budget.check_degree(params.k)
    coeffs = coefficients(params)
    seeds = np.roots(np.array(coeffs, dtype=float))
    prec = precision
    while True:
        try:
            return _certified_roots(params, coeffs, seeds, prec, precision)
        except PrecisionError:
            if prec >= MAX_PRECISION_BITS:
                raise PrecisionError(
                    f"root set of p_{params.k} (beta={params.beta}) not certified at {prec} bits; retry with more bits"
                )
            prec *= 2


def _certified_roots(params, coeffs, seeds, prec, out_prec) -> RootSet:
    k = params.k
    dom = dominant_root_bracketed(params, prec)
    with mp.workprec(prec + GUARD_BITS):
        z = [mpmath.mpc(complex(s)) for s in seeds]
        # break exact coincidences in float seeds
        z = [zi + mpmath.mpc(0, 1) * mpmath.mpf(2) ** (-60) * (i + 1) for i, zi in enumerate(z)]
        z, converged = _aberth(coeffs, z, mpmath.mpf(2) ** (-prec))
        if not converged:
            raise PrecisionError("Aberth iteration did not converge")
        radii = _weierstrass_radii(coeffs, z)
        idx = max(range(k), key=lambda i: z[i].real)
        zd = z[idx]
        # the dominant disk must hold the certified real root
        if abs(zd - dom.value) > radii[idx] + mpmath.mpf(2) ** (-prec + 8):
            raise PrecisionError("dominant root from the simultaneous iteration disagrees with the bracketed root")
        disjoint = all(
            abs(z[i] - z[j]) > radii[i] + radii[j] for i in range(k) for j in range(i + 1, k)
        )
        if not disjoint:
            raise PrecisionError("inclusion disks overlap")
        others_idx = [i for i in range(k) if i != idx]
        others_idx.sort(key=lambda i: (float(mpmath.arg(z[i])), float(z[i].imag)))
        inside = all(abs(z[i]) + radii[i] < 1 for i in others_idx)
        outside = abs(zd) - radii[idx] > 1
        # a disjoint disk symmetric about the real axis holds a real root
        neg_real = sum(1 for i in others_idx if abs(z[i].imag) <= radii[i] and z[i].real < 0)
        parity_ok = neg_real == (1 if k % 2 == 0 else 0)
        residuals = [abs(_horner(coeffs, mpmath.mpc(dom.value)))] + [abs(_horner(coeffs, z[i])) for i in others_idx]
        rad = [radii[idx]] + [radii[i] for i in others_idx]
        dominant_in_range = 1 < dom.lo and dom.hi < params.beta
    with mp.workprec(out_prec):
        others = [+z[i] for i in others_idx]
        # snap certified real roots onto the axis
        others = [mpmath.mpc(w.real, 0) if abs(w.imag) <= r else w for w, r in zip(others, rad[1:])]
        return RootSet(
            params=params,
            dominant=dom.value,
            others=others,
            residuals=[+r for r in residuals],
            radii=[+r for r in rad],
            precision=prec,
            flags={
                "dominant_in_range": dominant_in_range,
                "dominant_outside_unit": outside,
                "others_inside_unit": inside,
                "simple": disjoint,
                "negative_roots": neg_real,
                "negative_parity_ok": parity_ok,
            },
        )


def root_structure_ok(rs: RootSet) -> bool:
    f = rs.flags
    return all(f[key] for key in ("dominant_in_range", "dominant_outside_unit", "others_inside_unit", "simple", "negative_parity_ok"))
