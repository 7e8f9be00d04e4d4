import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spanlift.accountant import (DP, RDP, TCDP, ZCDP, CompositionPlan, RdpCurve, advanced_composition,
                                 compare_foldg, compose, compose_all, convert, gauss_dp_epsilon,
                                 group_privacy, rdp_group)
from spanlift.errors import FlavorMismatch, InvalidParam, UnsupportedDirection, UnsupportedFlavor


def test_compose_examples():
    out = compose(DP(1, 1e-6), DP(0.5, 0))
    assert out == DP(1.5, 1e-6)
    assert compose(RDP(2, 0.1), RDP(2, 0.3)).rho == pytest.approx(0.4, abs=1e-15)
    K, sigma = 100, 10.0
    assert compose_all([ZCDP(0, 1 / (2 * sigma ** 2))] * K).rho == pytest.approx(K / (2 * sigma ** 2), rel=1e-13)
    with pytest.raises(FlavorMismatch) as e:
        compose(DP(1, 0), ZCDP(1, 0))
    assert e.value.code == "FLAVOR_MISMATCH"
    with pytest.raises(FlavorMismatch):
        compose(TCDP(2, 1), TCDP(3, 1))


def _family(kind):
    nn = st.floats(0, 100)
    return {
        "DP": st.builds(DP, nn, st.floats(0, 1)),
        "RDP": st.builds(lambda r: RDP(3, r), nn),
        "zCDP": st.builds(ZCDP, nn, nn),
        "tCDP": st.builds(lambda r: TCDP(5, r), nn),
    }[kind]


@pytest.mark.parametrize("kind", ["DP", "RDP", "zCDP", "tCDP"])
@given(data=st.data())
def test_compose_monoid(kind, data):
    a, b, c = (data.draw(_family(kind)) for _ in range(3))
    zero = a.with_grade(0.0, 0.0)
    assert compose(a, zero) == a == compose(zero, a)
    lhs, rhs = compose(compose(a, b), c), compose(a, compose(b, c))
    assert lhs.a == pytest.approx(rhs.a, rel=1e-14, abs=1e-300)
    assert lhs.d == pytest.approx(rhs.d, rel=1e-14, abs=1e-300)


def test_convert_examples():
    eps = convert(ZCDP(0, 0.5), "DP", delta=1e-5).epsilon
    assert eps == pytest.approx(0.5 + 2 * math.sqrt(0.5 * math.log(1e5)), rel=1e-14)
    assert eps == pytest.approx(5.2985, abs=1e-4)
    assert convert(DP(0.3, 0), "zCDP") == ZCDP(0.3, 0)
    assert convert(RDP(2, 0.1), "DP", delta=1e-5).epsilon == pytest.approx(11.6129, abs=1e-4)
    curve = convert(ZCDP(0, 0.2), "RDP")
    assert isinstance(curve, RdpCurve) and curve(7).rho == 0.2 and curve(7).alpha == 7
    assert convert(ZCDP(0, 0.2), "RDP", alpha=3) == RDP(3, 0.2)


def test_convert_tcdp():
    omega, rho, delta = 10.0, 0.1, 1e-6
    L = math.log(1 / delta)
    beta = min(omega, 1 + math.sqrt(L / rho))
    assert convert(TCDP(omega, rho), "DP", delta=delta).epsilon == pytest.approx(rho * beta + L / (beta - 1))


def test_convert_errors_and_assumptions():
    notes = []
    convert(ZCDP(0, 0.5), "DP", delta=1e-3, assumptions=notes)
    assert notes and notes[0]["kind"] == "lossless"
    with pytest.raises(InvalidParam):
        convert(ZCDP(0, 0.5), "DP", delta=1e-3, lossless=False)
    with pytest.raises(InvalidParam) as e:
        convert(ZCDP(0, 0.5), "DP", delta=1.0)
    assert e.value.code == "INVALID_PARAM"
    with pytest.raises(UnsupportedDirection) as e:
        convert(DP(1, 0), "tCDP")
    assert e.value.code == "UNSUPPORTED_DIRECTION"
    with pytest.raises(InvalidParam):
        convert(DP(1, 0.1), "zCDP")


def test_round_trip_never_gains():
    for eps, delta in itertools.product([0.01, 0.1, 0.5, 1, 3, 10], [1e-12, 1e-8, 1e-5, 1e-2, 0.3, 0.9]):
        z = convert(DP(eps, 0), "zCDP")
        back = convert(z, "DP", delta=delta)
        assert back.epsilon >= eps
        assert convert(z, "DP").epsilon == eps


def test_group_privacy():
    assert group_privacy(DP(0.4, 0), 2) == DP(0.8, 0)
    e, d = 0.4, 1e-6
    g = group_privacy(DP(e, d), 2)
    assert g.epsilon == pytest.approx(0.8) and g.delta == pytest.approx((math.exp(e) + 1) * d, rel=1e-14)
    g3 = group_privacy(DP(e, d), 3)
    assert g3.epsilon == pytest.approx(1.2)
    assert g3.delta == pytest.approx(math.exp(e) * g.delta + d, rel=1e-14)
    with pytest.raises(UnsupportedFlavor) as err:
        group_privacy(TCDP(3, 0.1), 2)
    assert err.value.code == "UNSUPPORTED_FLAVOR"
    with pytest.raises(InvalidParam):
        group_privacy(DP(1, 0), 1)
    with pytest.raises(InvalidParam):
        group_privacy(RDP(2, 0.1), 2)
    notes = []
    z = group_privacy(ZCDP(0.1, 0.2), 3, notes=notes)
    assert z == ZCDP(0.1 * 6, 9 * 0.2) and notes


def test_rdp_group_gaussian():
    curve = RdpCurve.gaussian(1.0, 1.0)
    assert curve(2).rho == pytest.approx(1.0)
    # Exact distance-2 value is alpha * 4 / 2 = 4; the chained bound is looser.
    v = rdp_group(lambda a: curve(a).rho, 2, 2.0)
    assert v == pytest.approx(4.5) and v >= 4.0
    assert group_privacy(curve, 2, alpha=2.0) == RDP(2.0, v)


def test_advanced_composition():
    out = advanced_composition(0.2, 1e-7, 100, 1e-5)
    assert out.epsilon == pytest.approx(0.2 * math.sqrt(200 * math.log(1e5)) + 4, rel=1e-14)
    assert out.epsilon == pytest.approx(13.597, abs=1e-3)
    assert out.delta == 100 * 1e-7 + 1e-5
    assert advanced_composition(0.5, 1e-6, 1, 1e-9).epsilon >= 0.5
    for bad in [(0, 1e-6, 2, 1e-6), (1, 0.6, 2, 1e-6), (1, 1e-6, 2, 0.5), (1, 1e-6, 0, 1e-6)]:
        with pytest.raises(InvalidParam):
            advanced_composition(*bad)


def test_compare_foldg_example():
    rep = compare_foldg(100, 10.0, 1e-7, 1e-5)
    assert rep["zcdp"]["epsilon"] == pytest.approx(5.30, abs=5e-3)
    assert rep["zcdp"]["epsilon"] == pytest.approx(0.5 + math.sqrt(200 * math.log(1e5)) / 10, rel=1e-13)
    assert rep["advanced"]["epsilon"] > rep["zcdp"]["epsilon"]
    assert rep["inequality_checked"] and rep["zcdp_better"]
    assert rep["advanced"]["intermediate"]["per_step_epsilon"] == pytest.approx(gauss_dp_epsilon(10.0, 1e-7))
    assert set(rep["zcdp"]) == {"route", "epsilon", "delta", "intermediate"}


def test_compare_foldg_single_step_reports_only():
    rep = compare_foldg(1, 2.0, 1e-6, 1e-3)
    assert not rep["inequality_checked"]
    assert rep["zcdp"]["epsilon"] > 0 and rep["advanced"]["epsilon"] > 0


def test_compare_foldg_invalid():
    with pytest.raises(InvalidParam):
        compare_foldg(100, 10.0, 1e-7, 0.5)
    with pytest.raises(InvalidParam):
        compare_foldg(0, 10.0, 1e-7, 1e-5)
    with pytest.raises(InvalidParam):
        compare_foldg(10, -1.0, 1e-7, 1e-5)


GRID = list(itertools.product([10, 100, 1000], [1.0, 10.0, 50.0], [1e-9, 1e-5, 0.3]))


@pytest.mark.parametrize("K,sigma,delta2", GRID)
def test_compare_foldg_grid(K, sigma, delta2):
    rep = compare_foldg(K, sigma, 1e-7, delta2)
    assert rep["zcdp_better"]
    assert rep["zcdp_matched"]["epsilon"] < rep["advanced"]["epsilon"]


def test_composition_plan():
    steps = [DP(0.1, 1e-6)] * 10
    assert CompositionPlan(steps).evaluate()["epsilon"] == pytest.approx(1.0)
    adv = CompositionPlan(steps, "ADVANCED_DP", {"delta": 1e-5}).evaluate()
    assert adv["epsilon"] == pytest.approx(advanced_composition(0.1, 1e-6, 10, 1e-5).epsilon)
    z = CompositionPlan([ZCDP(0, 0.05)] * 10, "ZCDP_THEN_CONVERT", {"delta": 1e-5}).evaluate()
    assert z["epsilon"] == pytest.approx(convert(ZCDP(0, 0.5), "DP", delta=1e-5).epsilon)
    r = CompositionPlan([RDP(2, 0.01)] * 10, "RDP_THEN_CONVERT", {"delta": 1e-5}).evaluate()
    assert r["epsilon"] == pytest.approx(0.1 + math.log(1e5))
    with pytest.raises(FlavorMismatch):
        CompositionPlan([ZCDP(0, 1)], "NAIVE_DP")
    with pytest.raises(InvalidParam):
        CompositionPlan([DP(0.1, 0), DP(0.2, 0)], "ADVANCED_DP", {"delta": 1e-5}).evaluate()
