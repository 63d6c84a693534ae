from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyi_evt.config import Budget, MapParams
from renyi_evt.evt import (
    EvtParams,
    as_fraction,
    binet_coefficients,
    binet_fib,
    binet_terms,
    cluster_stats_exact,
    convergence_record,
    convergence_table,
    dprime_sum,
    evt_limit,
    evt_probability,
    n_of_k,
    simplified_binet_check,
    tail_bound,
    theta,
)
from renyi_evt.recurrence import FibTable


@pytest.fixture(autouse=True, scope="module")
def _wide_mpmath():
    with mpmath.workprec(200):
        yield


def mp_of(x: F):
    return mpmath.mpf(x.numerator) / x.denominator


def test_lambda_is_exact():
    assert as_fraction("0.1") == F(1, 10)
    assert n_of_k(2, 10, "0.1") == 102
    with pytest.raises(ValueError):
        as_fraction(0)


def test_limits():
    assert theta(2) == F(1, 2)
    assert abs(evt_limit(2, 1) - mpmath.exp(-0.5)) < 1e-30
    assert abs(evt_limit(3, 2) - mpmath.exp(-mpmath.mpf(4) / 3)) < 1e-30


def test_dominant_weight_k2():
    c = binet_coefficients(MapParams(2, 2))
    # (phi - 1)/(2 + 3(phi - 2)) = 1/sqrt(5) * phi
    assert abs(c.dominant_weight - (1 + mpmath.sqrt(5)) / (2 * mpmath.sqrt(5))) < 1e-30


def test_binet_beta2_k2_f6():
    assert abs(binet_fib(binet_coefficients(MapParams(2, 2)), 6) - 8) < 8e-9


def test_binet_beta3_k2():
    assert abs(binet_fib(binet_coefficients(MapParams(3, 2)), 4) - 16) < 16e-9


@pytest.mark.parametrize("k", [3, 6, 10])
def test_simplified_binet_beta2(k):
    rep = simplified_binet_check(MapParams(2, k), (max(1, k - 2), 60))
    assert rep.all_agree and rep.first_unbroken == max(1, k - 2)


def test_simplified_binet_beta3_reports_threshold():
    rep = simplified_binet_check(MapParams(3, 4), (1, 40))
    assert rep.first_unbroken is not None


def test_all_routes_agree_small():
    assert evt_probability(2, 1, 2, "exact") == F(13, 32)
    assert evt_probability(2, 1, 2, "fib") == F(13, 32)
    assert abs(evt_probability(2, 1, 2, "binet") - mpmath.mpf(13) / 32) < 1e-30


@pytest.mark.parametrize("beta, lam, k", [(2, 1, 4), (3, F(1, 2), 2), (5, F(1, 5), 2), (2, "0.3", 5)])
def test_exact_methods_agree(beta, lam, k):
    a = evt_probability(beta, lam, k, "exact", exact_method="intervals")
    b = evt_probability(beta, lam, k, "exact", exact_method="haiman")
    c = evt_probability(beta, lam, k, "fib")
    assert a == b == c


def test_convergence_record_fields():
    r = convergence_record(2, 1, 8)
    assert r.n_k == 256 and r.routes_agree and r.exact_method == "haiman"
    assert abs(r.p_binet - mp_of(r.p_fib)) < 1e-30
    assert r.tail <= r.tail_bound
    assert abs(r.dominant_term - r.p_binet) <= r.tail_bound


def test_error_decays_with_k():
    rows = convergence_table(EvtParams(2, 1, 4, 11))
    errs = [r.abs_err for r in rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_beta3_lambda2_moves_toward_limit():
    rows = convergence_table(EvtParams(3, 2, 3, 7))
    assert rows[-1].abs_err < rows[0].abs_err < 0.1


def test_tail_bound_formula():
    assert tail_bound(2, 2, 4) == mpmath.mpf(2) / (abs(2 + 3 * (1 - 2)) * 2**6)


def test_binet_terms_sum_to_probability():
    p = MapParams(3, 3)
    n = n_of_k(3, 3, 1)
    t = binet_terms(p, n)
    total = t.scale * (t.dominant + mpmath.fsum(t.others))
    exact = FibTable(p).max_prob(n)
    assert abs(total.real - mp_of(exact)) < 1e-30
    assert abs(total.imag) < 1e-30


@pytest.mark.parametrize("beta", [2, 3])
def test_dprime_bound_and_limit(beta):
    for k in range(3, 7):
        d = dprime_sum(beta, 1, k)
        assert d.value >= d.lower_bound
    assert d.limit == F(1, beta - 1)


def test_dprime_exact_lags_match_bound_route():
    # lags >= k contribute u^2 exactly, which the inclusion bound undercuts
    full = dprime_sum(2, 1, 4, j_max=None)
    partial = dprime_sum(2, 1, 4, j_max=2)
    assert full.value >= partial.value >= partial.lower_bound


def test_dprime_small_case_by_hand():
    # beta=2, k=3, n=8: two lags, both < k, each u/2^j with u=1/8
    d = dprime_sum(2, 1, 3)
    assert d.lags == 2 and d.value == 8 * (F(1, 16) + F(1, 32))


@pytest.mark.parametrize("beta", [2, 3, 5])
def test_cluster_law_exact(beta):
    law = cluster_stats_exact(beta, 6)
    assert all(law.probs[q] == F(beta - 1, beta**q) for q in range(1, 7))
    assert law.mean == F(beta, beta - 1) and law.theta == theta(beta)
    assert law.truncated_mass == 1 - F(1, beta**6)


def test_cluster_law_k3():
    law = cluster_stats_exact(2, 4, k=3)
    assert law.probs == {q: F(1, 2**q) for q in range(1, 5)}


def test_binet_budget_guard():
    from renyi_evt.config import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        binet_coefficients(MapParams(2, 30), budget=Budget(max_degree=16))


# -- properties --------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(2, 10), st.integers(1, 80))
def test_binet_matches_fib(beta, k, n):
    c = binet_coefficients(MapParams(beta, k))
    f = FibTable(MapParams(beta, k)).fib(n)
    assert abs(binet_fib(c, n) - f) <= 1e-9 * f


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.fractions(min_value=F(1, 4), max_value=3, max_denominator=16), st.integers(2, 7))
def test_fib_route_is_a_probability(beta, lam, k):
    p = evt_probability(beta, lam, k, "fib")
    assert 0 < p < 1
    assert p == evt_probability(beta, lam, k, "exact", exact_method="haiman")
