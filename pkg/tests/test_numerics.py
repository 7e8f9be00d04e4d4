import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spanlift.errors import InvalidParam, NumericLimitDiverged
from spanlift.numerics import (INF, NEG_INF, WeightFn, check_convexity, ext_add, ext_sum,
                               logsumexp, perspective, weight_dp, weight_renyi)


def test_ext_add_convention():
    assert ext_add(INF, NEG_INF) == NEG_INF
    assert ext_add(NEG_INF, INF) == NEG_INF
    assert ext_add(0.0, 0.0) == 0.0
    assert ext_add(3.5, NEG_INF) == NEG_INF
    assert ext_add(3.5, INF) == INF
    assert ext_sum([1.0, INF, NEG_INF, 2.0]) == NEG_INF


CLASSES = [NEG_INF, -2.5, 0.0, 1.25, INF]


@pytest.mark.parametrize("a", CLASSES)
@pytest.mark.parametrize("b", CLASSES)
def test_ext_add_commutative(a, b):
    assert ext_add(a, b) == ext_add(b, a)
    assert not math.isnan(ext_add(a, b))


@pytest.mark.parametrize("a", CLASSES)
@pytest.mark.parametrize("b", CLASSES)
@pytest.mark.parametrize("c", CLASSES)
def test_ext_add_associative(a, b, c):
    assert ext_add(ext_add(a, b), c) == ext_add(a, ext_add(b, c))


def test_perspective_examples():
    sq = weight_renyi(2)
    assert perspective(0.0, 0.0, sq) == 0.0
    assert perspective(0.25, 0.75, sq) == pytest.approx(2.25, abs=1e-15)
    hinge = WeightFn(lambda t: max(0.0, 1 - t), "hinge")  # no registered recession
    assert perspective(0.0, 1.0, hinge) == pytest.approx(0.0, abs=1e-9)
    assert perspective(0.0, 1.0, weight_dp(0.5)) == 0.0
    assert perspective(0.0, 0.5, sq) == INF


def test_perspective_numeric_limit_diverges():
    wild = WeightFn(lambda t: t * t, "unregistered square")
    with pytest.raises(NumericLimitDiverged):
        perspective(0.0, 1.0, wild)


def test_perspective_rejects_bad_args():
    with pytest.raises(InvalidParam):
        perspective(-1.0, 0.5, weight_dp(0))


@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.01, 50.0), st.floats(1.01, 4.0))
def test_perspective_homogeneous(q, p, c, alpha):
    for f in (weight_dp(0.3), weight_renyi(alpha)):
        lhs = perspective(c * q, c * p, f)
        rhs = c * perspective(q, p, f)
        if math.isinf(rhs):
            assert lhs == rhs
        else:
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_weight_dp_examples():
    f = weight_dp(0)
    assert f(1) == 0 and f(0) == 1 and f(2) == 0
    assert weight_dp(math.log(2))(0.25) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidParam):
        weight_dp(-0.1)


def test_weight_renyi_examples():
    assert weight_renyi(2)(3) == 9
    assert weight_renyi(2)(0) == 0
    assert weight_renyi(1.5)(4) == pytest.approx(8.0, abs=1e-12)
    with pytest.raises(InvalidParam):
        weight_renyi(1.0)


def test_convexity_witnesses_random():
    rng = random.Random(7)
    triples = [(rng.uniform(0, 10), rng.uniform(0, 10), rng.random()) for _ in range(100)]
    for f in (weight_dp(0.0), weight_dp(1.3), weight_renyi(1.5), weight_renyi(4.0)):
        assert check_convexity(f, triples) == []
    concave = WeightFn(lambda t: -t * t, "concave")
    assert check_convexity(concave, triples)


def test_weight_continuous_at_zero():
    for f in (weight_dp(0.7), weight_renyi(2.5)):
        vals = [f(2.0 ** -k) for k in range(10, 40)]
        assert abs(vals[-1] - f(0)) < 1e-9


def test_logsumexp():
    assert logsumexp([]) == NEG_INF
    assert logsumexp([NEG_INF, NEG_INF]) == NEG_INF
    assert logsumexp([0.0, 0.0]) == pytest.approx(math.log(2))
    assert logsumexp([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2))
