import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renyi_evt.config import MapParams
from renyi_evt.orbit_sim import (
    SimConfig,
    Tally,
    _tally_chunk,
    cluster_chi_square,
    empirical_clusters,
    empirical_max_prob,
    exceedances,
    product_limit_mean,
    simulate,
    uniformity_check,
)
from renyi_evt.recurrence import FibTable


def test_exceedance_windows():
    d = np.array([[1, 1, 0, 1, 1, 1]], dtype=np.uint8)
    # X_i exceeds 1 - 2^-2 iff digits i+1, i+2 are both 1
    assert exceedances(d, 2, 2, 5).tolist() == [[True, False, False, True, True]]


@pytest.mark.parametrize("beta, k, n, exact", [(2, 2, 3, 0.5), (2, 2, 1, 0.75)])
def test_small_cases_within_ci(beta, k, n, exact):
    est = empirical_max_prob(SimConfig(MapParams(beta, k), n, 50_000, seed=3))
    assert abs(est.z_score(exact)) < 4


def test_k8_within_four_sigma():
    p = MapParams(2, 8)
    est = empirical_max_prob(SimConfig(p, 256, 50_000, seed=11))
    assert abs(est.z_score(FibTable(p).max_prob(256))) < 4


def test_reproducible_and_worker_independent():
    cfg = SimConfig(MapParams(2, 4), 40, 25_000, seed=7, chunk=4_000)
    a = simulate(cfg)
    assert a == simulate(cfg)
    assert a == simulate(cfg, workers=2)


def test_seed_and_stream_change_the_draws():
    base = SimConfig(MapParams(2, 4), 40, 5_000, seed=7)
    other_seed = SimConfig(MapParams(2, 4), 40, 5_000, seed=8)
    other_stream = SimConfig(MapParams(2, 4), 40, 5_000, seed=7, stream_id=1)
    assert simulate(base) != simulate(other_seed)
    assert simulate(base) != simulate(other_stream)


def test_tally_merge_is_commutative():
    cfg = SimConfig(MapParams(3, 2), 30, 3_000, seed=1, chunk=1_000)
    a, b = _tally_chunk((cfg, 0, 1000)), _tally_chunk((cfg, 1, 1000))
    assert a.merge(b) == b.merge(a)
    assert a.merge(Tally()) == a


def test_truncated_runs_are_separated():
    cfg = SimConfig(MapParams(2, 3), 20, 20_000, seed=5)
    t = simulate(cfg)
    assert t.truncated == sum(t.censored.values()) > 0
    assert sum(q * c for q, c in t.histogram.items()) + sum(q * c for q, c in t.censored.items()) == t.exceedances


def test_cluster_law_beta2():
    st_ = empirical_clusters(SimConfig(MapParams(2, 6), 256, 40_000, seed=2))
    assert st_.chi2_p > 1e-3
    assert abs(st_.theta_km - 0.5) < 4 * st_.theta_se
    probs = st_.probabilities
    assert abs(probs[1] / probs[2] - 2) < 0.15


def test_cluster_mean_beta3():
    st_ = empirical_clusters(SimConfig(MapParams(3, 4), 200, 40_000, seed=4))
    assert abs(st_.mean_size - 1.5) < 4 * st_.mean_se


def test_few_clusters_flag():
    st_ = empirical_clusters(SimConfig(MapParams(2, 10), 50, 500, seed=0))
    assert st_.few_clusters


def test_product_limit_without_censoring_is_sample_mean():
    assert product_limit_mean({1: 5, 2: 3, 4: 2}, {}) == pytest.approx((5 + 6 + 8) / 10)


def test_product_limit_censoring_raises_the_mean():
    complete = {1: 50, 2: 25, 3: 12}
    assert product_limit_mean(complete, {3: 10}) > product_limit_mean(complete, {})


def test_chi_square_pools_tail():
    hist = {1: 500, 2: 250, 3: 125, 4: 62, 5: 31, 6: 16, 7: 8, 8: 4, 9: 2}
    _, dof, p = cluster_chi_square(hist, 2)
    assert p > 0.5 and dof <= 7


def test_uniformity():
    res = uniformity_check(SimConfig(MapParams(2, 4), 10, 20_000, seed=9))
    assert [r.t for r in res] == [0, 5]
    assert all(r.bins == 8 and r.p_value > 1e-4 for r in res)


def test_preconditions():
    with pytest.raises(ValueError):
        uniformity_check(SimConfig(MapParams(2, 4), 10, 9_999))
    with pytest.raises(ValueError):
        empirical_max_prob(SimConfig(MapParams(2, 4), 10, 50))
    with pytest.raises(ValueError):
        SimConfig(MapParams(2, 4), 0, 10)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(1, 40), st.integers(0, 2**32))
def test_tally_accounting(beta, k, n, seed):
    cfg = SimConfig(MapParams(beta, k), n, 300, seed=seed)
    t = simulate(cfg)
    runs = sum(t.histogram.values()) + t.truncated
    assert t.no_exceedance <= t.samples
    assert runs <= t.exceedances
    assert (t.exceedances == 0) == (t.no_exceedance == t.samples)
