"""Acceptance criteria as plain functions, shared by the test suite and ``renyi-evt verify``.

Each ``criterion_*`` returns a :class:`CriterionResult`; tolerances are fixed here.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .config import Budget, MapParams
from .evt import (
    EvtParams,
    binet_coefficients,
    binet_fib,
    cluster_stats_exact,
    convergence_table,
    dprime_sum,
    simplified_binet_check,
)
from .io import decimal_str
from .measure import exceedance_union_measures, new_subinterval_counts
from .orbit_sim import SimConfig, empirical_clusters, empirical_max_prob, simulate
from .recurrence import FibTable, brute_force_prob, fib_from_union_measures
from .spectral import bracket_threshold

SEED = 20_190_417
INTERVAL_BUDGET = Budget(max_intervals=2**16)
BINET_RTOL = 1e-9
K0_MAX = 5

# smallest k from which the Newton bracket holds through k = 64 (recorded on first verified run)
GOLDEN_K0 = {2: 2, 3: 2, 10: 2}

# P(M_{n_k} <= 1 - 2^-k) for beta = 2, lambda = 1 to 15 significant digits (exact fib route)
GOLDEN_CONVERGENCE = {
    8: "0.600279210600996",
    9: "0.603115228167571",
    10: "0.604676836782613",
    11: "0.605530300929604",
    12: "0.605993635746077",
    13: "0.606243689008009",
    14: "0.606377934196402",
    15: "0.606449673712519",
    16: "0.606487854177924",
    17: "0.606508100416425",
    18: "0.606518801725891",
}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2}. {self.name} ({self.seconds:.1f}s): {self.detail}"


def _timed(number: int, name: str):
    def deco(fn):
        def wrapper(*args, **kwargs) -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kwargs)
            return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)

        wrapper.__name__ = fn.__name__
        wrapper.__doc__ = fn.__doc__
        return wrapper

    return deco


@_timed(1, "three-route exactness")
def criterion_1(betas=(2, 3, 5), ks=range(1, 7), n_max: int = 40, budget: Budget = INTERVAL_BUDGET):
    checked_interval = checked = 0
    for beta in betas:
        for k in ks:
            p = MapParams(beta, k)
            tab = FibTable(p)
            n_int = min(n_max, max(n for n in range(1, n_max + 1) if beta ** (n - 1) <= budget.max_intervals))
            geo = exceedance_union_measures(p, n_int, budget)
            for n in range(1, n_max + 1):
                via_rec = 1 - tab.haiman_b(n)
                via_fib = tab.max_prob(n)
                if via_rec != via_fib:
                    return False, f"recursion != fib at beta={beta} k={k} n={n}"
                checked += 1
                if n <= n_int:
                    if 1 - geo[n - 1] != via_rec:
                        return False, f"intervals != recursion at beta={beta} k={k} n={n}"
                    checked_interval += 1
    return True, f"{checked} triples recursion=fib, {checked_interval} also by interval algebra"


@_timed(2, "brute-force oracle equality")
def criterion_2(beta2_len: int = 22, beta3_len: int = 13):
    count = 0
    for beta, ks, max_len in ((2, range(1, 5), beta2_len), (3, range(1, 4), beta3_len)):
        for k in ks:
            p = MapParams(beta, k)
            tab = FibTable(p)
            for n in range(1, max_len - k + 2):
                if brute_force_prob(p, n) != tab.max_prob(n):
                    return False, f"mismatch at beta={beta} k={k} n={n}"
                count += 1
    return True, f"{count} (beta,k,n) triples equal exactly"


@_timed(3, "Fibonacci counts of new subintervals")
def criterion_3():
    p = MapParams(2, 2)
    fibs = FibTable(p).fibs(6)[1:]
    counts = new_subinterval_counts(p, 6)
    from_measure = fib_from_union_measures(p, exceedance_union_measures(p, 6))
    ok = fibs == [1, 2, 3, 5, 8] and counts == fibs and from_measure == fibs
    return ok, f"F_2..F_6={fibs}, new subintervals={counts}, from measures={from_measure}"


@_timed(4, "Binet accuracy")
def criterion_4(betas=(2, 3), ks=range(2, 13), n_max: int = 60, precision: int = 128):
    worst = 0.0
    for beta in betas:
        for k in ks:
            p = MapParams(beta, k)
            c = binet_coefficients(p, precision)
            tab = FibTable(p)
            for n in range(1, n_max + 1):
                f = tab.fib(n)
                rel = float(abs(binet_fib(c, n) - f) / f)
                worst = max(worst, rel)
                if rel > BINET_RTOL:
                    return False, f"relative error {rel:.3g} at beta={beta} k={k} n={n}"
    return True, f"max relative error {worst:.3g} <= {BINET_RTOL:g}"


@_timed(5, "root bounds")
def criterion_5(betas=(2, 3, 10), k_max: int = 64):
    found = {}
    for beta in betas:
        k0, _ = bracket_threshold(beta, k_max)
        found[beta] = k0
    ok = all(found[b] is not None and found[b] <= K0_MAX and found[b] == GOLDEN_K0.get(b) for b in betas)
    return ok, f"K0 = {found} (golden {GOLDEN_K0}, bound {K0_MAX})"


_convergence_cache: dict = {}


def _beta2_table():
    if "t" not in _convergence_cache:
        _convergence_cache["t"] = convergence_table(EvtParams(2, Fraction(1), 8, 18))
    return _convergence_cache["t"]


@_timed(6, "extreme value limit convergence")
def criterion_6():
    recs = {r.k: r for r in _beta2_table()}
    e10, e18 = recs[10].abs_err, recs[18].abs_err
    if not all(r.routes_agree for r in recs.values()):
        return False, "exact route disagrees with fib route"
    mism = [k for k, r in recs.items() if GOLDEN_CONVERGENCE and decimal_str(r.p_fib) != GOLDEN_CONVERGENCE.get(k)]
    ok = e18 <= 1e-3 and e18 < e10 and not mism and bool(GOLDEN_CONVERGENCE)
    return ok, f"err(k=10)={decimal_str(e10, 6)}, err(k=18)={decimal_str(e18, 6)}, golden mismatches={mism}"


@_timed(7, "tail bound on non-dominant terms")
def criterion_7():
    bad = [r.k for r in _beta2_table() if not r.tail <= r.tail_bound]
    worst = max(r.tail / r.tail_bound for r in _beta2_table())
    return not bad, f"max tail/bound ratio {decimal_str(worst, 4)}; violations at k={bad}"


@_timed(8, "cluster-size law")
def criterion_8(samples: int = 100_000, seed: int = SEED):
    for beta in (2, 3, 5):
        law = cluster_stats_exact(beta, 8)
        for q, pr in law.probs.items():
            if pr != Fraction(beta - 1, beta**q):
                return False, f"exact P(size {q}) = {pr} for beta={beta}"
    st = empirical_clusters(SimConfig(MapParams(2, 8), 256, samples, seed))
    # dropping window-cut runs favours short ones; the product-limit mean keeps them as censored
    z = (st.theta_km - 0.5) / st.theta_se
    z_drop = (st.theta_hat - 0.5) / st.theta_se
    ok = st.chi2_p > 1e-3 and abs(z) <= 3
    return ok, (
        f"exact law ok for beta 2,3,5 q<=8; sim: {st.clusters} clusters, chi2 p={st.chi2_p:.3g}, "
        f"theta={st.theta_km:.5f} ({z:+.2f} se); complete-runs-only theta={st.theta_hat:.5f} ({z_drop:+.2f} se)"
    )


@_timed(9, "anti-clustering condition failure")
def criterion_9():
    parts = []
    for beta in (2, 3):
        for k in range(3, 9):
            d = dprime_sum(beta, 1, k)
            if not d.value >= d.lower_bound:
                return False, f"lower bound violated at beta={beta} k={k}"
        if not d.value > Fraction(9, 10) * d.limit:
            return False, f"k=8 value {float(d.value):.4f} below 0.9 * {d.limit}"
        parts.append(f"beta={beta}: k=8 value {float(d.value):.4f} vs limit {d.limit}")
    return True, "; ".join(parts)


@_timed(10, "simulation consistency")
def criterion_10(samples: int = 100_000, seed: int = SEED):
    p = MapParams(2, 8)
    cfg = SimConfig(p, 256, samples, seed)
    est = empirical_max_prob(cfg)
    exact = FibTable(p).max_prob(256)
    z = est.z_score(exact)
    again = simulate(cfg) == simulate(cfg)
    ok = abs(z) <= 4 and again
    return ok, f"estimate {est.estimate:.5f} vs exact {float(exact):.5f} ({z:+.2f} se), reproducible={again}"


@_timed(11, "simplified Binet formula")
def criterion_11(n_hi: int = 60):
    for k in range(3, 11):
        rep = simplified_binet_check(MapParams(2, k), (max(1, k - 2), n_hi))
        if not rep.all_agree:
            return False, f"beta=2 k={k}: mismatches at n={rep.mismatches}"
    thresholds = {k: simplified_binet_check(MapParams(3, k), (1, n_hi)).first_unbroken for k in range(2, 11)}
    return True, f"beta=2 k=3..10 agree; beta=3 first unbroken n by k: {thresholds}"


def run_all(quick: bool = False) -> list[CriterionResult]:
    """Every criterion; ``quick`` shrinks the brute-force grid and simulation sample sizes."""
    samples = 20_000 if quick else 100_000
    return [
        criterion_1(),
        criterion_2(*((16, 10) if quick else (22, 13))),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(samples=samples),
        criterion_9(),
        criterion_10(samples=samples),
        criterion_11(),
    ]
