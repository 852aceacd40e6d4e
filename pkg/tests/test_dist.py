import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from iosrates import dgp, dist, ordstat
from iosrates.dgp import ConditionalLaw

SUP = np.array([[0.0], [1.0]])


def two(p):
    return ConditionalLaw(kind="discrete", pmf=np.array([1 - p, p]), support=SUP)


def normal(mu):
    return ConditionalLaw(kind="gaussian_location", mean=np.array([float(mu)]))


def pmf_law(p):
    return ConditionalLaw(kind="discrete", pmf=np.asarray(p), support=np.arange(len(p))[:, None])


def test_identical_laws_zero():
    for law in (two(0.3), normal(0.2), dgp.ball_law(dgp.get_spec("gaussian_boundary"), 0.1)):
        assert dist.hellinger(law, law).value == pytest.approx(0, abs=1e-12)
        assert dist.total_variation(law, law).value == pytest.approx(0, abs=1e-12)


def test_cubic_two_point_hellinger():
    a = ConditionalLaw(kind="discrete", pmf=np.array([1.0, 0.0]), support=SUP)
    b = two(0.5**3 / 4)
    h = dist.hellinger(a, b).value
    assert h**2 == pytest.approx(1 - math.sqrt(1 - 1 / 32), rel=1e-14)
    assert h == pytest.approx(0.12549, abs=1e-5)


def test_gaussian_hellinger_closed_form_and_quadrature():
    h = dist.hellinger(normal(0), normal(0.2)).value
    assert h**2 == pytest.approx(1 - math.exp(-0.005), rel=1e-14)
    f = lambda y: (math.sqrt(stats.norm.pdf(y)) - math.sqrt(stats.norm.pdf(y, 0.2))) ** 2
    quad = 0.5 * integrate.quad(f, -40, 40, epsabs=1e-14)[0]
    assert h**2 == pytest.approx(quad, abs=1e-10)


def test_gaussian_tv():
    tv = dist.total_variation(normal(0), normal(0.2)).value
    assert tv == pytest.approx(2 * special.ndtr(0.1) - 1, rel=1e-13)
    assert tv == pytest.approx(0.0796557, abs=1e-7)
    f = lambda y: abs(stats.norm.pdf(y) - stats.norm.pdf(y, 0.2))
    assert tv == pytest.approx(0.5 * integrate.quad(f, -40, 40, points=[0.1], epsabs=1e-14)[0], abs=1e-10)


def test_two_point_tv():
    eps = 0.123
    assert dist.total_variation(two(0.5), two(0.5 - eps)).value == pytest.approx(eps, abs=1e-15)


def test_mismatched_supports():
    other = ConditionalLaw(kind="discrete", pmf=np.array([0.5, 0.5]), support=np.array([[0.0], [2.0]]))
    with pytest.raises(ValueError):
        dist.hellinger(two(0.5), other)
    with pytest.raises(ValueError):
        dist.hellinger(two(0.5), normal(0))


def test_mixture_engine_vs_generic_quadrature():
    s = dgp.get_spec("gaussian_boundary")
    law = dgp.ball_law(s, 0.4)
    target = dgp.conditional_law(s)
    h = dist.hellinger(law, target).value
    tv = dist.total_variation(law, target).value
    f = lambda y: float(dist._sq_sqrt_diff(law.pdf(y), stats.norm.pdf(y)))
    g = lambda y: abs(float(law.pdf(y)) - stats.norm.pdf(y))
    assert h**2 == pytest.approx(0.5 * integrate.quad(f, -30, 30, epsabs=1e-15, limit=400)[0], abs=1e-10)
    assert tv == pytest.approx(0.5 * integrate.quad(g, -30, 30, points=[0.2], epsabs=1e-15, limit=400)[0], abs=1e-10)
    # symmetry
    assert dist.hellinger(target, law).value == pytest.approx(h, abs=1e-12)


def test_interior_gaussian_mixture_two_crossings():
    s = dgp.get_spec("gaussian_interior")
    law = dgp.ball_law(s, 0.3)
    est = dist.total_variation(law, dgp.conditional_law(s))
    assert "2 crossing" in est.detail
    g = lambda y: abs(float(law.pdf(y)) - stats.norm.pdf(y, 0.5))
    ref = 0.5 * integrate.quad(g, -30, 30, points=[0.5 - 1, 0.5 + 1], epsabs=1e-15, epsrel=1e-13, limit=1000)[0]
    assert est.value == pytest.approx(ref, abs=1e-10)


def _random_pmf(rng, size):
    p = rng.random(size) ** 3
    return p / p.sum()


def test_sandwich_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        size = rng.integers(2, 8)
        p, q = pmf_law(_random_pmf(rng, size)), pmf_law(_random_pmf(rng, size))
        h = dist.hellinger(p, q).value
        tv = dist.total_variation(p, q).value
        assert h * h <= tv + 1e-12
        assert tv <= math.sqrt(2) * h + 1e-12
        assert dist.hellinger(q, p).value == h
        assert dist.total_variation(q, p).value == tv


def test_triangle_inequality():
    rng = np.random.default_rng(1)
    for _ in range(500):
        a, b, c = (pmf_law(_random_pmf(rng, 5)) for _ in range(3))
        ab, bc, ac = (dist.hellinger(x, y).value for x, y in ((a, b), (b, c), (a, c)))
        assert ac <= ab + bc + 1e-12


def test_tensorize_examples():
    assert dist.tensorize_hellinger(0.0, 7) == 0.0
    assert dist.tensorize_hellinger(0.037, 1) == pytest.approx(0.037, rel=1e-15)
    assert dist.tensorize_hellinger(0.01, 10) == pytest.approx(1 - 0.99**10, rel=1e-14)
    assert dist.tensorize_hellinger(0.01, 10) == pytest.approx(0.0956179, abs=1e-7)
    assert dist.tensorize_hellinger(1e-18, 3) == pytest.approx(3e-18, rel=1e-12)


def brute_product_h2(p, q, k):
    total = []
    for cfg in itertools.product((0, 1), repeat=k):
        j = sum(cfg)
        a = p**j * (1 - p) ** (k - j)
        b = q**j * (1 - q) ** (k - j)
        total.append((math.sqrt(a) - math.sqrt(b)) ** 2)
    return 0.5 * math.fsum(total)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(1, 12))
@settings(max_examples=60, deadline=None)
def test_tensorization_matches_enumeration(p, q, k):
    h2 = dist.hellinger(two(p), two(q)).value ** 2
    assert dist.tensorize_hellinger(min(h2, 1.0), k) == pytest.approx(brute_product_h2(p, q, k), abs=1e-12)


def test_tensorization_k10_example():
    p, q = 0.5, None
    # find q with marginal H^2 = 0.01 on a two-point law and compare products
    from scipy.optimize import brentq

    q = brentq(lambda t: dist.hellinger(two(p), two(t)).value ** 2 - 0.01, 0.5, 0.99, xtol=1e-16)
    assert brute_product_h2(p, q, 10) == pytest.approx(dist.tensorize_hellinger(0.01, 10), abs=1e-12)


def test_twopoint_distance_stable():
    tiny = 1e-12
    h = float(dist.twopoint_distance(0.5, tiny, "h"))
    # H^2 ~ delta^2 / (8 pi (1 - pi)) for small delta
    assert h == pytest.approx(tiny / math.sqrt(2), rel=1e-6)


# joint engines --------------------------------------------------------------


def test_joint_k_equals_n():
    s = dgp.get_spec("holder_boundary_k1")
    n = k = 6
    est = dist.joint_distance_exact(s, n, k, "h")
    pi0 = 0.5
    pfull = pi0 + float(dgp.ball_delta(s, s.r_tilde))
    assert est.value ** 2 == pytest.approx(brute_product_h2(pfull, pi0, k), abs=1e-13)
    tv = dist.joint_distance_exact(s, n, k, "tv").value
    j = np.arange(k + 1)
    ref = 0.5 * np.abs(stats.binom.pmf(j, k, pfull) - stats.binom.pmf(j, k, pi0)).sum()
    assert tv == pytest.approx(ref, abs=1e-13)


@pytest.mark.parametrize("sid", ["holder_boundary_k1", "cubic_support", "log_correction"])
def test_joint_k1_matches_mixture_marginal(sid):
    s = dgp.get_spec(sid)
    n = 50
    dens = ordstat.r_order_density(s, n, 1)
    law = ordstat.radius_law(s)
    pbar = integrate.quad(lambda r: float(dgp.ball_pi(s, max(r, 1e-300))) * dens(r), 0, law.r_max,
                          epsabs=1e-15, epsrel=1e-13, limit=500,
                          points=[law.r_max / n, 3 * law.r_max / n])[0]
    target = dgp.conditional_law(s)
    for metric in ("h", "tv"):
        ref = dist._law_distance(two(pbar), target, metric).value
        est = dist.joint_distance_exact(s, n, 1, metric).value
        assert est == pytest.approx(ref, rel=1e-7, abs=1e-13)


def test_joint_exact_vs_configuration_enumeration():
    # all 2^k configurations, each with its own mixture probability
    s = dgp.get_spec("holder_boundary_k1")
    n, k = 40, 5
    dens = ordstat.r_order_density(s, n, k)
    rmax = ordstat.radius_law(s).r_max
    h2 = []
    tv = []
    for cfg in itertools.product((0, 1), repeat=k):
        j = sum(cfg)
        f = lambda r: float(dgp.ball_pi(s, max(r, 1e-300))) ** j * (1 - float(dgp.ball_pi(s, max(r, 1e-300)))) ** (k - j) * dens(r)
        m = integrate.quad(f, 0, rmax, epsabs=1e-15, epsrel=1e-12, limit=300)[0]
        b = 0.5**k
        h2.append((math.sqrt(m) - math.sqrt(b)) ** 2)
        tv.append(abs(m - b))
    assert dist.joint_distance_exact(s, n, k, "h").value == pytest.approx(math.sqrt(0.5 * math.fsum(h2)), rel=1e-7)
    assert dist.joint_distance_exact(s, n, k, "tv").value == pytest.approx(0.5 * math.fsum(tv), rel=1e-7)


def test_joint_exact_rejects_continuous_and_large_k():
    with pytest.raises(ValueError):
        dist.joint_distance_exact(dgp.get_spec("gaussian_boundary"), 100, 10, "h")
    with pytest.raises(ValueError):
        dist.joint_distance_exact(dgp.get_spec("holder_boundary_k1"), 10**6, 20_000, "h")


def test_joint_zero_for_null():
    s = dgp.get_spec("null_twopoint")
    assert dist.joint_distance_exact(s, 100, 10, "h").value == 0
    assert dist.joint_distance_bound(s, 100, 10, "h").value == 0
    assert dist.joint_distance_bound(s, 100, 10, "tv").value == 0


def test_bound_dominates_exact_holder():
    s = dgp.get_spec("holder_boundary_k1")
    for n, k in ((200, 8), (2000, 32)):
        for metric in ("h", "tv"):
            e = dist.joint_distance_exact(s, n, k, metric)
            b = dist.joint_distance_bound(s, n, k, metric)
            assert b.value >= e.value - 2 * (b.err + e.err)
            assert b.method == "upper_bound"


def test_bound_decreases_gaussian_schedule():
    s = dgp.get_spec("gaussian_boundary")
    vals = [dist.joint_distance_bound(s, n, int(math.isqrt(n)), "h").value
            for n in (2**8, 2**10, 2**12, 2**14)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_joint_exact_monte_carlo_oracle():
    """Plug-in estimate of H over the 2^8 configurations from simulated IOS."""
    s = dgp.get_spec("holder_boundary_k1")
    n, k, reps = 200, 8, 1_000_000
    rng = np.random.default_rng(2024)
    law = ordstat.radius_law(s)
    # R_(k+1) via its uniform order statistic, then k i.i.d. draws from P_R
    u = rng.beta(k + 1, n - k, size=reps)
    pi = dgp.base_pi(s) + dgp.ball_delta(s, law.quantile(u))
    y = rng.random((reps, k)) < pi[:, None]
    codes = y @ (1 << np.arange(k))
    counts = np.bincount(codes, minlength=2**k)
    p_hat = counts / reps
    ones = np.array([bin(c).count("1") for c in range(2**k)])
    q = 0.5**k * np.ones(2**k)
    aff_hat = np.sum(np.sqrt(p_hat * q))
    # delta-method s.e. of the affinity and first-order bias of sqrt(p_hat)
    g = 0.5 * np.sqrt(q / np.where(p_hat > 0, p_hat, 1))
    var = (np.sum(g**2 * p_hat) - np.sum(g * p_hat) ** 2) / reps
    bias = -np.sum(np.sqrt(q) / np.sqrt(np.where(p_hat > 0, p_hat, 1)) * (1 - p_hat)) / (8 * reps)
    h2_hat = 1 - (aff_hat - bias)
    exact = dist.joint_distance_exact(s, n, k, "h").value
    se_h2 = math.sqrt(var)
    assert abs(h2_hat - exact**2) <= 3 * se_h2 + 1e-7
    del ones


# local expansion ------------------------------------------------------------


def test_local_expansion_gaussian():
    s = dgp.get_spec("gaussian_boundary")
    rep = dist.local_expansion_check(s, [0.0, 0.1])
    assert rep["rows"][0]["D"] == 0 and rep["rows"][0]["quadratic"] == 0
    row = rep["rows"][1]
    assert row["D"] == pytest.approx(2 * (1 - math.exp(-0.01 / 8)), rel=1e-14)
    assert row["D"] == pytest.approx(0.0024984, abs=1e-7)
    assert row["quadratic"] == pytest.approx(0.0025, rel=1e-15)
    ratios = dist.local_expansion_check(s, [2.0**-j for j in range(2, 9)])["ratios"]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1) < 1e-5


def test_local_expansion_twopoint_score():
    s = dgp.get_spec("holder_boundary_k1")
    ratios = dist.local_expansion_check(s, [2.0**-j for j in range(4, 12)])["ratios"]
    assert abs(ratios[-1] - 1) < 1e-3


def test_local_expansion_rejects_non_qmd():
    with pytest.raises(ValueError):
        dist.local_expansion_check(dgp.get_spec("holder_boundary_k0.5"), [0.1])


def test_distance_estimate_validation():
    with pytest.raises(ValueError):
        dist.DistanceEstimate(1.5, "h", "closed_form")
    with pytest.raises(ValueError):
        dist.DistanceEstimate(0.5, "h", "closed_form", err=-1)
