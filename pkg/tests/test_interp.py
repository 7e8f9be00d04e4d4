import random
from fractions import Fraction

import pytest

from spanlift.dist import GridSpec, SubDist, bind, dirac
from spanlift.errors import InvalidParam, MissingGrid
from spanlift.golden import attmean_source
from spanlift.interp import (InterpConfig, eval_cmd, eval_expr, eval_pexpr, lossless_check,
                             make_memory, project, run)
from spanlift.lang import parse_cmd, parse_context, parse_program, typecheck
from spanlift.lang.ast import Seq

CTX = parse_context("vars { x: real; k: int; v: real^3; b: bool; y: real; }")
CFG = InterpConfig(fuel=16, default_grid=GridSpec(0, 10, 201))


def expr(src, ctx=CTX):
    return parse_cmd(f"y <- {src}").expr


def test_config_validation():
    with pytest.raises(InvalidParam):
        InterpConfig(fuel=0)
    with pytest.raises(InvalidParam):
        InterpConfig(dust_tol=1e-3)


def test_eval_expr_examples():
    m = make_memory(CTX, {"x": "5/2", "k": 7, "v": [1, 2, 3]})
    assert eval_expr(expr("x"), m, CTX) == Fraction(5, 2)
    assert eval_expr(parse_cmd("k <- 1 + 2").expr, m, CTX) == 3
    assert eval_expr(expr("v[5]"), m, CTX) == 3
    assert eval_expr(expr("v[0 - 4]"), m, CTX) == 1


def test_division_convention():
    m = make_memory(CTX, {"x": 3, "k": 7})
    assert eval_expr(expr("x / 0.0"), m, CTX) == 0
    assert eval_expr(parse_cmd("k <- k / 2").expr, m, CTX) == 3
    assert eval_expr(parse_cmd("k <- k / 0").expr, m, CTX) == 0
    assert eval_expr(expr("x / 2.0"), m, CTX) == Fraction(3, 2)


def test_eval_pexpr_examples():
    m = make_memory(CTX, {"x": 1})
    assert eval_pexpr(parse_cmd("y <-$ Dirac(x + 1.0)").dist, m, CTX, CFG) == dirac(2)
    assert dict(eval_pexpr(parse_cmd("b <-$ Bern(0.25)").dist, m, CTX, CFG)) == {True: 0.25, False: 0.75}
    g = eval_pexpr(parse_cmd("y <-$ Gauss(0.0, 1.0)").dist, m, CTX, CFG, "y")
    assert g.mass() >= 1 - 1e-12 and g.dust <= 1e-20
    for c in list(g)[:50]:
        assert g[c] == pytest.approx(g[-c], abs=1e-15)
    with pytest.raises(MissingGrid) as e:
        eval_pexpr(parse_cmd("y <-$ Lap(0.0, 1.0)").dist, m, CTX, InterpConfig(), "y")
    assert e.value.code == "MISSING_GRID"


def test_eval_cmd_examples():
    m = make_memory(CTX)
    mu = SubDist({m: 0.5, make_memory(CTX, {"k": 1}): 0.25})
    assert eval_cmd(parse_cmd("skip"), mu, CTX, CFG) == mu
    out = eval_cmd(parse_cmd("x <- 1.0; x <- x + 1.0"), dirac(m), CTX, CFG)
    assert out == dirac(make_memory(CTX, {"x": 2}))
    out, rep = run(parse_cmd("while true do { skip }"), CTX, m, InterpConfig(fuel=5))
    assert out.mass() == 0.0 and rep["residual_mass"] == 1.0 and rep["fuel_exhausted"]
    assert set(rep) >= {"output_support_size", "residual_mass", "rounding_dust"}


RANDOM_PROGRAMS = [
    "b <-$ Bern(0.5); if b then { k <- k + 1 } else { k <- k - 1 }",
    "k <- 0; while k < 3 do { b <-$ Bern(0.5); if b then { k <- k + 1 } else { skip } }",
    "y <-$ Lap(x, 1.0); if y > 0.0 then { x <- y } else { x <- 0.0 - y }",
    "v[k] <- x; x <-$ Gauss(v[1], 2.0)",
]


@pytest.mark.parametrize("src", RANDOM_PROGRAMS)
def test_seq_is_kleisli(src):
    c = parse_cmd(src)
    typecheck(c, CTX)
    assert isinstance(c, Seq)
    head, tail = c.items[0], Seq(c.items[1:]) if len(c.items) > 2 else c.items[1]
    cfg = InterpConfig(fuel=8, default_grid=GridSpec(0, 4, 9))
    rng = random.Random(3)
    for _ in range(5):
        m = make_memory(CTX, {"x": Fraction(rng.randint(-4, 4)), "k": rng.randint(0, 2)})
        whole = eval_cmd(c, dirac(m), CTX, cfg)
        staged = bind(eval_cmd(head, dirac(m), CTX, cfg), lambda m2: eval_cmd(tail, dirac(m2), CTX, cfg))
        assert whole.isclose(staged, 1e-12)
        assert whole.mass() <= 1 + 1e-12


def test_fuel_monotone():
    c = parse_cmd("k <- 0; b <- true; while b do { b <-$ Bern(0.5); k <- k + 1 }")
    m = make_memory(CTX)
    masses = [eval_cmd(c, dirac(m), CTX, InterpConfig(fuel=f)).mass() for f in range(1, 12)]
    assert all(a <= b + 1e-15 for a, b in zip(masses, masses[1:]))
    assert masses[0] == pytest.approx(0.5) and masses[-1] == pytest.approx(1 - 2.0 ** -11)


def test_attmean_deterministic_part_is_mean():
    """The accumulation loop of AttMean lands on the exact arithmetic mean."""
    c, ctx = parse_program(attmean_source(4))
    det = Seq(c.items[:-1])
    assert "Gauss" not in repr(det)
    rng = random.Random(9)
    for _ in range(25):
        xs = [Fraction(rng.randint(0, 8), 8) for _ in range(4)]
        out = eval_cmd(det, dirac(make_memory(ctx, {"x": xs})), ctx, InterpConfig(fuel=8))
        assert len(out) == 1 and out.mass() == 1.0
        assert project(out, ctx, "z") == dirac(sum(xs) / 4)


def test_lossless_check():
    m = make_memory(CTX)
    cfg = InterpConfig(fuel=4)
    assert lossless_check(parse_cmd("x <- 1.0"), CTX, [m], cfg) == (True, 0.0)
    bounded = parse_cmd("k <- 0; while k < 4 do { k <- k + 1 }")
    assert lossless_check(bounded, CTX, [m], cfg)[0]
    assert lossless_check(parse_cmd("while true do { skip }"), CTX, [m], cfg) == (False, 1.0)
