from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyi_evt.config import Budget, BudgetExceeded, MapParams
from renyi_evt.measure import (
    Interval,
    IntervalSet,
    cluster_event_measure,
    exceedance_set,
    exceedance_union_measure,
    exceedance_union_measures,
    joint_exceedance_measure,
    new_subinterval_counts,
    preimage,
    set_algebra,
)


def S(*ivs):
    return IntervalSet.from_intervals([(F(a), F(b)) for a, b in ivs])


# -- oracle values -----------------------------------------------------

def test_e0_beta2_k2():
    assert exceedance_set(MapParams(2, 2), 0) == S(("3/4", "1"))


def test_e1_beta2_k2():
    assert exceedance_set(MapParams(2, 2), 1) == S(("3/8", "1/2"), ("7/8", "1"))


@pytest.mark.parametrize("i", range(8))
def test_every_exceedance_set_has_measure_u(i):
    assert exceedance_set(MapParams(2, 2), i).measure() == F(1, 4)


def test_adjacent_intervals_merge():
    assert S((0, "1/2")).union(S(("1/2", 1))) == IntervalSet.full()
    assert len(S((0, "1/2")) | S(("1/2", 1))) == 1


def test_nested_intersection():
    assert S(("3/4", 1)).intersect(S(("7/8", 1))) == S(("7/8", 1))


def test_measure_two_pieces():
    assert S(("3/8", "1/2"), ("7/8", 1)).measure() == F(1, 4)


def test_set_algebra_dispatch():
    a, b = S((0, "1/2")), S(("1/4", "3/4"))
    assert set_algebra(a, b, "union") == S((0, "3/4"))
    assert set_algebra(a, b, "intersect") == S(("1/4", "1/2"))
    assert set_algebra(a, None, "complement") == S(("1/2", 1))
    assert set_algebra(a, None, "measure") == F(1, 2)
    with pytest.raises(ValueError):
        set_algebra(a, b, "xor")


def test_preimage_two_branches():
    assert preimage(MapParams(2, 1), S(("1/2", 1))) == S(("1/4", "1/2"), ("3/4", 1))


@pytest.mark.parametrize("u", [F(1, 3), F(2, 7), F(1), F(5, 9)])
def test_preimage_beta3_keeps_measure(u):
    assert preimage(MapParams(3, 1), S((0, u))).measure() == u


def test_preimage_of_empty():
    assert not preimage(MapParams(2, 1), IntervalSet.empty())


@pytest.mark.parametrize(
    "n, expected", [(1, F(1, 4)), (2, F(3, 8)), (3, F(1, 2)), (4, F(19, 32)), (5, F(43, 64))]
)
def test_union_measures_beta2_k2(n, expected):
    assert exceedance_union_measure(MapParams(2, 2), n) == expected


def test_union_measure_linear_phase_beta3_k1():
    # B_2 = u + (beta-1)/beta * u: the k=1 linear phase
    assert exceedance_union_measure(MapParams(3, 1), 2) == F(5, 9)


def test_new_subinterval_counts_are_fibonacci():
    assert new_subinterval_counts(MapParams(2, 2), 6) == [1, 2, 3, 5, 8]


@pytest.mark.parametrize("j", [1, 2])
def test_joint_exceedance_k1(j):
    assert joint_exceedance_measure(MapParams(2, 1), j) == F(1, 4)


@pytest.mark.parametrize("beta, k", [(2, 2), (2, 3), (3, 2), (5, 2)])
def test_joint_exceedance_closed_form(beta, k):
    p = MapParams(beta, k)
    u = p.u
    for j in range(1, k + 4):
        expected = u / beta**j if j < k else u * u
        assert joint_exceedance_measure(p, j) == expected
        assert joint_exceedance_measure(p, j) >= u / beta**j


@pytest.mark.parametrize("q, expected", [(1, F(1, 8)), (2, F(1, 16)), (3, F(1, 32))])
def test_cluster_event_measure(q, expected):
    assert cluster_event_measure(MapParams(2, 2), q) == expected


def test_budget_refuses_large_sets():
    with pytest.raises(BudgetExceeded) as e:
        exceedance_set(MapParams(2, 2), 20, Budget(max_intervals=1000))
    assert e.value.needed == 2**20 and e.value.limit == 1000


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(F(1, 2), F(1, 2))
    with pytest.raises(ValueError):
        Interval(F(-1, 2), F(1, 2))


def test_windowed_set_equals_clipped_full_set():
    p = MapParams(3, 2)
    win = (F(8, 9), F(1))
    full = exceedance_set(p, 4)
    assert exceedance_set(p, 4, window=win) == full & S(win)


# -- properties --------------------------------------------------------

DEN = 64


@st.composite
def interval_sets(draw):
    pts = draw(st.lists(st.integers(0, DEN), min_size=0, max_size=10))
    pairs = []
    for a, b in zip(pts[::2], pts[1::2]):
        lo, hi = min(a, b), max(a, b)
        if lo < hi:
            pairs.append((lo, hi))
    den = draw(st.sampled_from([DEN, DEN * 3]))
    scale = den // DEN
    return IntervalSet(den, [(lo * scale, hi * scale) for lo, hi in pairs])


@given(interval_sets())
def test_canonical_form_is_idempotent(a):
    assert a.is_canonical()
    again = IntervalSet(a.den, a.pairs)
    assert again.pairs == a.pairs
    assert a.canonicalize() == a


@given(interval_sets(), interval_sets())
def test_inclusion_exclusion(a, b):
    assert (a | b).measure() + (a & b).measure() == a.measure() + b.measure()


@given(interval_sets())
def test_complement_partitions_unit_interval(a):
    assert a.measure() + (~a).measure() == 1
    assert not (a & ~a)
    assert (a | ~a) == IntervalSet.full()


@given(interval_sets(), interval_sets())
def test_difference_is_intersection_with_complement(a, b):
    assert a.difference(b) == a & ~b


@settings(max_examples=1000)
@given(interval_sets(), st.sampled_from([2, 3, 5]))
def test_preimage_preserves_lebesgue_measure(a, beta):
    assert preimage(MapParams(beta, 1), a).measure() == a.measure()


@settings(max_examples=40)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(0, 5))
def test_exceedance_set_measure_is_u(beta, k, i):
    p = MapParams(beta, k)
    assert exceedance_set(p, i).measure() == p.u


@settings(max_examples=30)
@given(st.sampled_from([2, 3]), st.integers(1, 4), st.integers(0, 4))
def test_exceedance_set_is_preimage_of_previous(beta, k, i):
    p = MapParams(beta, k)
    assert exceedance_set(p, i + 1) == preimage(p, exceedance_set(p, i))


@settings(max_examples=30)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4))
def test_union_measures_increase(beta, k):
    bs = exceedance_union_measures(MapParams(beta, k), 6)
    assert all(a < b for a, b in zip(bs, bs[1:]))
    assert all(0 < b < 1 for b in bs)
