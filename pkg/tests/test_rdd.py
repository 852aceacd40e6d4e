import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iosrates import dgp, rdd


def cvm_oracle(left, right):
    pooled = list(left) + list(right)
    q = len(left)
    total = 0.0
    for s in pooled:
        fl = sum(v <= s for v in left) / q
        fr = sum(v <= s for v in right) / q
        total += (fl - fr) ** 2
    return total / len(pooled)


def p_oracle(s):
    k = len(s)
    q = k // 2
    obs = cvm_oracle(s[:q], s[q:])
    hits = 0
    splits = list(itertools.combinations(range(k), q))
    for c in splits:
        left = [s[i] for i in c]
        right = [s[i] for i in range(k) if i not in c]
        hits += cvm_oracle(left, right) >= obs - 1e-12
    return hits / len(splits)


def test_worked_statistic():
    assert rdd.cvm_statistic([0, 1, 3, 8]) == 0.375
    assert rdd.cvm_statistic([3, 8, 1, 6]) == 0.125


def test_worked_enumeration():
    res = rdd.permutation_test([0, 1, 3, 8])
    assert res.exact and res.n_perms == 6
    assert res.p_value == pytest.approx(1 / 3, abs=1e-15)
    assert not res.reject


def test_separated_halves():
    res = rdd.permutation_test([1, 2, 3, 4, 5, 6, 7, 8])
    assert res.statistic == pytest.approx(cvm_oracle([1, 2, 3, 4], [5, 6, 7, 8]))
    assert res.p_value == pytest.approx(2 / 70)


def test_all_ties():
    res = rdd.permutation_test([2.0] * 6)
    assert res.statistic == 0
    assert res.p_value == 1


@given(st.lists(st.integers(0, 5), min_size=8, max_size=8))
@settings(max_examples=60, deadline=None)
def test_exact_matches_enumeration_oracle(vals):
    s = [float(v) for v in vals]
    res = rdd.permutation_test(s)
    assert res.statistic == pytest.approx(cvm_oracle(s[:4], s[4:]), abs=1e-15)
    assert res.p_value == pytest.approx(p_oracle(s), abs=1e-15)


@given(st.lists(st.integers(-20, 20), min_size=8, max_size=8))
@settings(max_examples=60, deadline=None)
def test_invariances(vals):
    s = np.array(vals, dtype=float)
    base = rdd.permutation_test(s)
    mono = rdd.permutation_test(np.exp(s / 3) * 2 + 1)
    assert mono.statistic == base.statistic and mono.p_value == base.p_value
    shuffled = np.concatenate([s[:4][::-1], s[4:][[2, 0, 3, 1]]])
    assert rdd.permutation_test(shuffled).p_value == base.p_value
    assert 0 < base.p_value <= 1


def test_random_agrees_with_exact():
    rng = np.random.default_rng(2)
    s = rng.normal(size=16)
    s[8:] += 0.8
    exact = rdd.permutation_test(s)
    rand = rdd.permutation_test(s, max_exact=10, n_random=20_000, seed=4)
    assert not rand.exact and exact.exact
    se = math.sqrt(exact.p_value * (1 - exact.p_value) / 20_000)
    assert abs(rand.p_value - exact.p_value) < 4 * se + 1e-4


def test_random_is_reproducible():
    s = np.arange(30.0)[::-1]
    a = rdd.permutation_test(s, max_exact=1, n_random=500, seed=9)
    b = rdd.permutation_test(s, max_exact=1, n_random=500, seed=9)
    assert a == b
    assert a.p_value == 1 / 501


def test_super_uniform_under_null():
    rng = np.random.default_rng(8)
    p = np.array([rdd.permutation_test(rng.normal(size=8)).p_value for _ in range(3000)])
    for alpha in (0.05, 0.1, 0.2):
        se = math.sqrt(alpha * (1 - alpha) / p.size)
        assert np.mean(p <= alpha) <= alpha + 2 * se


def test_input_validation():
    for bad in ([1.0], [1.0, 2.0, 3.0], np.zeros((4, 2))):
        with pytest.raises(ValueError):
            rdd.cvm_statistic(bad)
    with pytest.raises(ValueError):
        rdd.permutation_test([1, 2], alpha=0)


def test_q_rule():
    assert rdd.q_rule(2000, 0.5) == 44
    assert rdd.q_rule(10_000, 0.5) == 100
    assert rdd.q_rule(3, 0.1) == 2
    assert rdd.q_rule(100, 0.5, 2.5) == 25
    with pytest.warns(rdd.GrowthRateWarning):
        rdd.q_rule(1000, 0.7)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rdd.q_rule(1000, 0.6)
    with pytest.raises(ValueError):
        rdd.q_rule(10, 0.5, 0)


def test_simulate_two_sided_layout():
    s = dgp.get_spec("holder_boundary_k1")
    data = rdd.simulate_two_sided(s, s, 300, seed=1, rep=0)
    assert data.n == 300
    assert np.all(np.abs(data.x) <= 1)
    again = rdd.simulate_two_sided(s, s, 300, seed=1, rep=0)
    assert np.array_equal(data.x, again.x) and np.array_equal(data.y, again.y)
    with pytest.raises(ValueError):
        rdd.simulate_two_sided(dgp.get_spec("gaussian_interior"), s, 10, 0, 0)


def test_size_and_power_trend():
    null = dgp.get_spec("holder_boundary_k1")
    size = rdd.size_power_simulation(null, null, 400, 0.5, reps=300, n_random=199, seed=3)
    assert size["q"] == 20
    assert size["rejection_rate"] <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 300)
    # left spec at pi = 1/2, right spec with a different success probability
    shifted = dgp.make_null_twopoint(0.9)
    small = rdd.size_power_simulation(null, shifted, 100, 0.5, reps=100, n_random=199, seed=3)
    power = rdd.size_power_simulation(null, shifted, 400, 0.5, reps=100, n_random=199, seed=3)
    assert size["rejection_rate"] < small["rejection_rate"] < power["rejection_rate"]
    assert power["rejection_rate"] > 0.5


def test_size_simulation_validation():
    s = dgp.get_spec("holder_boundary_k1")
    with pytest.raises(ValueError):
        rdd.size_power_simulation(s, s, 100, 0.5, reps=0)
    with pytest.warns(rdd.GrowthRateWarning):
        rdd.size_power_simulation(s, s, 60, 0.7, reps=2, n_random=9)
