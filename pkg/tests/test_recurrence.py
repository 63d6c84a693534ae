from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyi_evt.config import Budget, BudgetExceeded, MapParams
from renyi_evt.measure import exceedance_union_measures
from renyi_evt.recurrence import (
    FibTable,
    brute_force_prob,
    fib,
    fib_from_measure,
    haiman_b,
    max_prob_via_fib,
)

P22 = MapParams(2, 2)


@pytest.mark.parametrize("n, expected", [(1, F(1, 4)), (5, F(43, 64))])
def test_haiman_beta2_k2(n, expected):
    assert haiman_b(P22, n) == expected


def test_haiman_beta3_k1_linear_phase():
    # (n-1)(beta-1)/beta*u + u with u = 1/3, n = 2
    assert haiman_b(MapParams(3, 1), 2) == F(5, 9)
    assert haiman_b(MapParams(3, 1), 2) == exceedance_union_measures(MapParams(3, 1), 2)[-1]


def test_fib_beta2_k2_values():
    assert [fib(P22, n) for n in range(2, 7)] == [1, 2, 3, 5, 8]


def test_fib_below_one_is_zero():
    assert fib(P22, 0) == 0


def test_fib_beta3_k2():
    assert fib(MapParams(3, 2), 4) == 16
    assert fib_from_measure(MapParams(3, 2), 4) == 16


def test_fib_from_measure_values():
    assert fib_from_measure(P22, 4) == 3
    assert fib_from_measure(P22, 6) == 8
    assert fib_from_measure(MapParams(5, 3), 3) == 20


@pytest.mark.parametrize("n, expected", [(1, F(3, 4)), (2, F(5, 8)), (3, F(1, 2))])
def test_max_prob_via_fib(n, expected):
    assert max_prob_via_fib(P22, n) == expected


@pytest.mark.parametrize(
    "beta, k, n, expected", [(2, 2, 1, F(3, 4)), (2, 1, 2, F(1, 4)), (3, 1, 1, F(2, 3))]
)
def test_brute_force_small(beta, k, n, expected):
    assert brute_force_prob(MapParams(beta, k), n) == expected


def test_brute_force_respects_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_prob(MapParams(2, 2), 30, Budget(max_strings=2**20))


@pytest.mark.parametrize("beta, k", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 2)])
def test_brute_force_matches_fib(beta, k):
    p = MapParams(beta, k)
    max_len = {2: 14, 3: 9, 5: 6}[beta]
    for n in range(1, max_len - k + 2):
        assert brute_force_prob(p, n) == max_prob_via_fib(p, n)


def test_streaming_past_memo_limit_matches_memo():
    small = FibTable(MapParams(2, 3), memo_limit=50)
    big = FibTable(MapParams(2, 3))
    for n in (49, 50, 51, 120, 300):
        assert small.fib(n) == big.fib(n)
        assert small.haiman_b(n) == big.haiman_b(n)


def test_scaled_b_is_integer_numerator():
    tab = FibTable(MapParams(3, 2))
    for n in range(1, 30):
        assert (tab.haiman_b(n) * 3 ** (n + 1)).denominator == 1


# -- properties --------------------------------------------------------

params = st.builds(MapParams, st.sampled_from([2, 3, 4, 5, 7]), st.integers(1, 6))


@settings(max_examples=60)
@given(params, st.integers(1, 80))
def test_recursion_step_relation(p, n):
    beta, k, u = p.beta, p.k, p.u
    tab = FibTable(p)
    prev = tab.haiman_b(n - k) if n > k else F(0)
    assert tab.haiman_b(n + 1) == tab.haiman_b(n) + F(beta - 1, beta) * u * (1 - prev)


@settings(max_examples=60)
@given(params, st.integers(1, 60))
def test_fib_link_to_union_measure(p, n):
    beta, k = p.beta, p.k
    tab = FibTable(p)
    assert 1 - tab.haiman_b(n) == F(tab.fib(n + k + 1), (beta - 1) * beta ** (n + k - 1))


@settings(max_examples=40)
@given(params, st.integers(1, 60))
def test_max_prob_decreases_in_n(p, n):
    tab = FibTable(p)
    assert 0 < tab.max_prob(n + 1) < tab.max_prob(n) < 1


@settings(max_examples=40)
@given(params)
def test_linear_phase_closed_form(p):
    beta, k, u = p.beta, p.k, p.u
    tab = FibTable(p)
    for n in range(1, k + 2):
        assert tab.haiman_b(n) == (n - 1) * F(beta - 1, beta) * u + u
    for n in range(2, k + 2):
        assert tab.fib(n) == (beta - 1) * beta ** (n - 2)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3))
def test_interval_algebra_matches_recursion(beta, k):
    p = MapParams(beta, k)
    n_max = 9 if beta == 2 else 6
    bs = exceedance_union_measures(p, n_max)
    assert bs == [haiman_b(p, n) for n in range(1, n_max + 1)]


@settings(max_examples=40)
@given(params)
def test_fib_strictly_increasing_after_linear_phase(p):
    tab = FibTable(p)
    start = p.k + 1 if p.beta == 2 else 2
    fs = [tab.fib(n) for n in range(start, start + 40)]
    if (p.beta, p.k) == (2, 1):
        assert set(fs) == {1}  # F_n = F_{n-1}: constant
    else:
        assert all(a < b for a, b in zip(fs, fs[1:]))


@settings(max_examples=40)
@given(params, st.integers(1, 60))
def test_step_relation_on_fib(p, n):
    beta, k = p.beta, p.k
    if n >= k + 1:
        tab = FibTable(p)
        assert tab.fib(n + 2) == beta * tab.fib(n + 1) - (beta - 1) * tab.fib(n + 1 - k)
