import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import bern, random_dist, random_kernel
from spanlift.dist import Gaussian, GridSpec, Laplace, SubDist, dirac, discretize_density
from spanlift.divergences import (ADDITIVE, COMPOSABLE, DPI, MONOTONE_ALPHA, REFLEXIVE,
                                  WEAK_TRIANGLE, DPDiv, FDiv, RenyiDiv, TCDPDiv, ZCDPDiv,
                                  check_property, divergence, dp_divergence, f_divergence,
                                  hockey_stick, partition_lower_bound, privacy_loss,
                                  renyi_closed_form, renyi_divergence, tcdp_divergence,
                                  zcdp_divergence)
from spanlift.errors import (InvalidParam, InvalidPartition, UndefinedLoss, UnsupportedPair,
                             UnsupportedProperty)
from spanlift.numerics import INF, NEG_INF, weight_dp, weight_renyi


def ref_renyi(alpha, mu1, mu2):
    """Plain-Python reference: log(sum mu1^a mu2^(1-a)) / (a - 1), max-shifted."""
    logs = []
    for x in set(mu1) | set(mu2):
        p, q = mu1[x], mu2[x]
        if p > 0 and q == 0:
            return INF
        if p > 0:
            logs.append(alpha * math.log(p) + (1 - alpha) * math.log(q))
    if not logs:
        return NEG_INF
    m = max(logs)
    return (m + math.log(math.fsum(math.exp(t - m) for t in logs))) / (alpha - 1)


def test_f_divergence_examples():
    mu = bern(0.3)
    assert f_divergence(weight_dp(0), mu, mu) == 0
    assert f_divergence(weight_dp(0), bern(0.75), bern(0.25)) == pytest.approx(0.5, abs=1e-15)
    assert f_divergence(weight_renyi(2), bern(0.5), bern(0.25)) == pytest.approx(4 / 3, abs=1e-15)


def test_dp_divergence_examples():
    assert dp_divergence(0, bern(0.4), bern(0.4)) == 0
    assert dp_divergence(0, bern(0.75), bern(0.25)) == pytest.approx(0.5, abs=1e-15)
    assert dp_divergence(math.log(3), bern(0.75), bern(0.25)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidParam):
        dp_divergence(-1, bern(0.5), bern(0.5))


def test_dp_divergence_closed_form_identity(rng):
    for _ in range(200):
        a, b = random_dist(rng, range(5), False), random_dist(rng, range(5), False)
        eps = rng.uniform(0, 2)
        direct = sum(max(0.0, b[x] - math.exp(eps) * a[x]) for x in range(5))
        assert dp_divergence(eps, a, b) == pytest.approx(direct, abs=1e-12)
        assert f_divergence(weight_dp(eps), a, b) == pytest.approx(direct, abs=1e-12)


def test_hockey_stick_swap(rng):
    assert hockey_stick(bern(0.75), bern(0.25), 0) == pytest.approx(0.5)
    for _ in range(100):
        a, b = random_dist(rng, range(4)), random_dist(rng, range(4))
        eps = rng.uniform(0, 1.5)
        assert hockey_stick(a, b, eps) == dp_divergence(eps, b, a)


def test_renyi_examples():
    mu = bern(0.3)
    assert renyi_divergence(2, mu, mu) == pytest.approx(0.0, abs=1e-15)
    assert renyi_divergence(2, bern(0.5), bern(0.25)) == pytest.approx(math.log(4 / 3), abs=1e-12)
    assert renyi_divergence(2, dirac("a"), SubDist({"a": 0.5, "b": 0.5})) == pytest.approx(math.log(2))
    assert renyi_divergence(2, dirac("a"), dirac("b")) == INF
    assert renyi_divergence(2, SubDist(), bern(0.5)) == NEG_INF
    with pytest.raises(InvalidParam):
        renyi_divergence(1.0, mu, mu)


def test_renyi_matches_reference(rng):
    for _ in range(300):
        a = random_dist(rng, range(6), full=rng.random() < 0.5)
        b = random_dist(rng, range(6), full=rng.random() < 0.5)
        alpha = rng.choice([1.5, 2.0, 4.0, 17.0])
        got, want = renyi_divergence(alpha, a, b), ref_renyi(alpha, a, b)
        if math.isinf(want):
            assert got == want
        else:
            assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_renyi_closed_form():
    assert renyi_closed_form(2, Gaussian(0, 1), Gaussian(1, 1)) == 1.0
    assert renyi_closed_form(2, Gaussian(0, 1), Gaussian(0, 1)) == 0.0
    assert renyi_closed_form(3, Gaussian(0, 4.5), Gaussian(3, 4.5)) == pytest.approx(3.0)
    with pytest.raises(UnsupportedPair):
        renyi_closed_form(2, Gaussian(0, 1), Laplace(0, 1))
    with pytest.raises(UnsupportedPair):
        renyi_closed_form(2, Gaussian(0, 1), Gaussian(0, 2))


def test_renyi_discretization_converges():
    errs = []
    for bins in (251, 1001, 4001, 20001):
        g = GridSpec(0, 10, bins)
        a, b = discretize_density(Gaussian(0, 1), g), discretize_density(Gaussian(1, 1), g)
        errs.append(abs(renyi_divergence(2, a, b) - 1.0))
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-3


def _oracle_sup(obj, lo, hi):
    """Independent maximizer: dense grid in log(alpha - 1) plus bounded Brent."""
    us = np.linspace(math.log(lo - 1), math.log(hi - 1), 4001)
    vals = [obj(1 + math.exp(u)) for u in us]
    i = int(np.argmax(vals))
    a, b = us[max(i - 1, 0)], us[min(i + 1, len(us) - 1)]
    res = minimize_scalar(lambda u: -obj(1 + math.exp(u)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10})
    return max(vals[i], -res.fun)


def test_zcdp_examples():
    mu = bern(0.3)
    v, cert = zcdp_divergence(0, mu, mu)
    assert v == pytest.approx(0.0, abs=1e-12)
    v, cert = zcdp_divergence(0, dirac("a"), SubDist({"a": 0.5, "b": 0.5}))
    assert v == pytest.approx(math.log(2), abs=1e-9)
    assert cert.endpoint == "alpha->1"
    v, cert = zcdp_divergence(0, dirac("a"), dirac("b"))
    assert v == INF and cert.endpoint == "support"
    with pytest.raises(InvalidParam):
        zcdp_divergence(-0.1, mu, mu)


def test_zcdp_against_independent_maximizer(rng):
    for _ in range(25):
        a = random_dist(rng, range(5), zeros=False)
        b = random_dist(rng, range(5), zeros=False)
        xi = rng.choice([0.0, 0.1])
        v, cert = zcdp_divergence(xi, a, b)
        kl = math.fsum(a[x] * math.log(a[x] / b[x]) for x in a)
        want = max(_oracle_sup(lambda al: (ref_renyi(al, a, b) - xi) / al, 1 + 1e-6, 1e6), kl - xi, 0.0)
        assert v == pytest.approx(want, abs=1e-9)
        for al in (1.01, 1.5, 2, 8, 100):
            assert v >= (ref_renyi(al, a, b) - xi) / al - 1e-12
        if cert.endpoint is None:
            at = (ref_renyi(cert.argmax_alpha, a, b) - xi) / cert.argmax_alpha
            assert at == pytest.approx(v, abs=1e-9)


def test_tcdp_examples_and_monotone(rng):
    mu = bern(0.3)
    assert tcdp_divergence(4, mu, mu)[0] == pytest.approx(0.0, abs=1e-12)
    for _ in range(100):
        a, b = random_dist(rng, range(4), zeros=False), random_dist(rng, range(4), zeros=False)
        assert tcdp_divergence(2, a, b)[0] <= tcdp_divergence(8, a, b)[0] + 1e-12
    a, b = random_dist(rng, range(4), zeros=False), random_dist(rng, range(4), zeros=False)
    kl = math.fsum(a[x] * math.log(a[x] / b[x]) for x in a)
    want = max(_oracle_sup(lambda al: ref_renyi(al, a, b) / al, 1 + 1e-6, 8), kl)
    assert tcdp_divergence(8, a, b)[0] == pytest.approx(want, abs=1e-9)
    with pytest.raises(InvalidParam):
        tcdp_divergence(1.0, mu, mu)


def test_privacy_loss():
    assert privacy_loss(bern(0.3), bern(0.3), True) == 1
    assert privacy_loss(bern(0.75), bern(0.25), True) == pytest.approx(3)
    assert privacy_loss(dirac(1), dirac(2), 1) == INF
    with pytest.raises(UndefinedLoss):
        privacy_loss(dirac(1), dirac(1), 5)


def test_privacy_loss_moment(rng):
    for _ in range(50):
        a, b = random_dist(rng, range(5), zeros=False), random_dist(rng, range(5), zeros=False)
        alpha = rng.uniform(1.2, 5)
        # E_{mu1}[L^(alpha-1)] = exp((alpha-1) D^alpha)
        m2 = sum(a[y] * privacy_loss(a, b, y) ** (alpha - 1) for y in a)
        assert m2 == pytest.approx(math.exp((alpha - 1) * renyi_divergence(alpha, a, b)), rel=1e-9)


def test_partition_lower_bound():
    a, b = bern(0.5), bern(0.25)
    f = weight_renyi(2)
    assert partition_lower_bound(f, a, b, [[True], [False]]) == f_divergence(f, a, b)
    assert partition_lower_bound(f, a, b, [[True, False]]) == pytest.approx(1.0)
    with pytest.raises(InvalidPartition):
        partition_lower_bound(f, a, b, [[True]])
    with pytest.raises(InvalidPartition):
        partition_lower_bound(f, a, b, [[True, False], [False]])


def test_divergence_dispatch():
    a, b = bern(0.5), bern(0.25)
    assert divergence(FDiv(weight_dp(0)), a, b)[1] is None
    assert divergence(DPDiv(0), a, b)[0] == dp_divergence(0, a, b)
    assert divergence(RenyiDiv(2), a, b)[0] == renyi_divergence(2, a, b)
    assert divergence(ZCDPDiv(0), a, b)[1].refined
    with pytest.raises(InvalidParam):
        RenyiDiv(1)
    with pytest.raises(InvalidParam):
        TCDPDiv(0.5)


def test_property_checks_smoke(rng):
    a, b, c = (random_dist(rng, range(4)) for _ in range(3))
    k = random_kernel(rng, range(4), "xy")
    assert check_property(REFLEXIVE, RenyiDiv(2), {"mu1": a})
    assert check_property(DPI, ZCDPDiv(0.1), {"mu1": a, "mu2": b, "k": k})
    assert check_property(ADDITIVE, DPDiv(0.2), {"mu1": a, "mu2": b, "mu3": c, "mu4": a})
    assert check_property(COMPOSABLE, TCDPDiv(8), {"mu1": a, "mu2": b, "f": k, "g": k})
    assert check_property(MONOTONE_ALPHA, RenyiDiv(2), {"mu1": a, "mu2": b})
    assert check_property(WEAK_TRIANGLE, RenyiDiv(2), {"mu1": a, "mu2": b, "mu3": c, "p": 2, "q": 2})
    with pytest.raises(UnsupportedProperty):
        check_property(WEAK_TRIANGLE, TCDPDiv(8), {"mu1": a, "mu2": b, "mu3": c})
    with pytest.raises(UnsupportedProperty):
        check_property(MONOTONE_ALPHA, DPDiv(0), {"mu1": a, "mu2": b})


def test_property_check_reports_failure():
    a = bern(0.3)
    res = check_property(REFLEXIVE, RenyiDiv(2), {"mu1": a}, slack=-1.0)
    assert not res.passed and res.witness["mu1"] is a


def test_additivity_equality_for_renyi(rng):
    from spanlift.dist import product

    for _ in range(50):
        m = [random_dist(rng, range(3), zeros=False) for _ in range(4)]
        lhs = renyi_divergence(2, product(m[0], m[2]), product(m[1], m[3]))
        rhs = renyi_divergence(2, m[0], m[1]) + renyi_divergence(2, m[2], m[3])
        assert lhs == pytest.approx(rhs, abs=1e-9)
