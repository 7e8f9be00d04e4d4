"""The span-apRHL rules as pure functions from premises to a conclusion.

``apply_rule(name, premises, side, env)`` recomputes the unique conclusion of
a rule instance.  Every rule reads the parameters it needs from ``side``;
the checker fills in fields that the rule takes verbatim from the stated
conclusion (programs of axioms, the weakened assertions of [weak], ...),
so a stated conclusion is only ever compared against, never trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from ..errors import ParseError, RuleError, SpanliftError, TypeCheckError
from ..lang.assertions import assign_subst, substitute
from ..lang.ast import (BOOL, INT, REAL, And, Assign, Atom, Bern, Comp, Context, Gauss, If,
                        Lap, Lit, Not, Or, RBin, RConst, Sample, SinhGauss, Skip, Tagged,
                        UnOp, Var, While, expr_vars, loops_bounded, modified_vars, seq)
from ..lang.entail import PROVED, entails
from ..lang.syntax import abs_le, parse_assertion, parse_cmd, parse_expr, show_assertion
from .flavors import DP, RDP, TCDP, ZCDP, Flavor, close, compose, grades_close, leq, unit
from .judgment import Judgment

# -- environment ---------------------------------------------------------------


@dataclass
class Env:
    """Per-check state: strictness, declared lemmas and what was assumed."""

    strict: bool = False
    lemmas: Dict[str, Tuple[object, object]] = field(default_factory=dict)
    assumptions: List[dict] = field(default_factory=list)
    experimental: List[dict] = field(default_factory=list)
    extensions: List[dict] = field(default_factory=list)
    path: str = "root"

    def entail(self, phi, psi, ctx: Context, what: str, cited=()) -> None:
        if entails(phi, psi, ctx) == PROVED:
            return
        for name in cited:
            if self.lemmas.get(name) == (phi, psi):
                self.assumptions.append({"kind": "lemma", "name": name, "path": self.path, "use": what})
                return
        if self.strict:
            raise RuleError(f"{what}: cannot prove {show_assertion(phi)} ==> {show_assertion(psi)}",
                            code="ENTAILMENT_UNKNOWN_STRICT")
        self.assumptions.append({
            "kind": "entailment", "path": self.path, "use": what,
            "from": show_assertion(phi), "to": show_assertion(psi),
        })

    def assume(self, kind: str, **detail) -> None:
        self.assumptions.append({"kind": kind, "path": self.path, **detail})


def _fail(msg: str, code: str = "SHAPE_MISMATCH"):
    raise RuleError(msg, code=code)


def _side_fail(msg: str):
    _fail(msg, "SIDE_CONDITION_FAILED")


# -- side parameters -------------------------------------------------------------


class Side:
    """Typed access to a rule's side parameters."""

    def __init__(self, data: dict, ctx: Optional[Context]):
        self.data = data
        self.ctx = ctx

    def has(self, key) -> bool:
        return key in self.data

    def raw(self, key):
        if key not in self.data:
            _side_fail(f"missing side parameter {key!r}")
        return self.data[key]

    def frac(self, key) -> Fraction:
        v = self.raw(key)
        try:
            if isinstance(v, bool):
                raise ValueError
            return Fraction(v) if isinstance(v, (int, Fraction)) else Fraction(str(v))
        except (ValueError, ZeroDivisionError):
            _side_fail(f"side parameter {key!r} must be a number, got {v!r}")

    def real(self, key) -> float:
        v = self.raw(key)
        if isinstance(v, str) and v.strip() in ("inf", "+inf"):
            return math.inf
        return float(self.frac(key))

    def int(self, key) -> int:
        v = self.raw(key)
        if isinstance(v, bool) or not isinstance(v, int):
            _side_fail(f"side parameter {key!r} must be an integer, got {v!r}")
        return v

    def cmd(self, key):
        v = self.raw(key)
        if isinstance(v, str):
            try:
                return parse_cmd(v)
            except ParseError as exc:
                _fail(f"side {key!r}: {exc}")
        return v

    def assertion(self, key):
        v = self.raw(key)
        if isinstance(v, str):
            try:
                return parse_assertion(v, self.ctx)
            except ParseError as exc:
                _fail(f"side {key!r}: {exc}")
        return v

    def expr(self, key):
        v = self.raw(key)
        if isinstance(v, str):
            try:
                return parse_expr(v)
            except ParseError as exc:
                _fail(f"side {key!r}: {exc}")
        return v

    def flavor(self) -> Flavor:
        v = self.raw("flavor")
        return v if isinstance(v, Flavor) else Flavor.from_json(v)

    def names(self, key) -> tuple:
        v = self.data.get(key, ())
        return (v,) if isinstance(v, str) else tuple(v)


# -- registry ------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleInfo:
    name: str
    kind: str  # basic | mechanism | transitivity | conversion | extension
    fn: Callable
    inherits: Tuple[str, ...]  # conclusion fields taken as side defaults
    arity: Optional[int]  # None: variable
    note: str = ""


RULES: Dict[str, RuleInfo] = {}
UNSUPPORTED = {"[tCDP-Trans]": "no transitivity law is known for tCDP"}


def rule(name, kind, inherits=(), arity=0, note=""):
    def deco(fn):
        RULES[name] = RuleInfo(name, kind, fn, tuple(inherits), arity, note)
        return fn

    return deco


def rule_names(kind: Optional[str] = None) -> List[str]:
    return [n for n, r in RULES.items() if kind is None or r.kind == kind]


def defaults_from_conclusion(name: str, j: Judgment) -> dict:
    info = RULES.get(name)
    out = {"ctx": j.ctx}
    if info is not None:
        for k in info.inherits:
            out[k] = getattr(j, k)
    return out


def apply_rule(name: str, premises: List[Judgment], side: dict, env: Optional[Env] = None) -> Judgment:
    """The conclusion of rule ``name`` on the given premise conclusions."""
    env = env if env is not None else Env()
    if name in UNSUPPORTED:
        _fail(f"{name}: {UNSUPPORTED[name]}", "UNSUPPORTED_RULE")
    info = RULES.get(name)
    if info is None:
        _fail(f"unknown rule {name}", "UNSUPPORTED_RULE")
    if info.arity is not None and len(premises) != info.arity:
        _fail(f"{name} takes {info.arity} premise(s), got {len(premises)}")
    ctx = side.get("ctx") or (premises[0].ctx if premises else None)
    if ctx is None:
        _fail(f"{name}: no typing context")
    for p in premises:
        if p.ctx != ctx:
            _fail(f"{name}: premises use different typing contexts")
    if info.kind == "extension":
        env.extensions.append({"rule": name, "path": env.path})
    try:
        return info.fn(premises, Side(side, ctx), env, ctx)
    except TypeCheckError as exc:
        raise RuleError(f"{name}: {exc.message}", code="SHAPE_MISMATCH") from exc
    except SpanliftError as exc:
        if isinstance(exc, RuleError):
            raise
        raise RuleError(f"{name}: {exc}", code="SIDE_CONDITION_FAILED") from exc


# -- helpers ---------------------------------------------------------------------------


def _eq_atom(x1: str, x2: str) -> Atom:
    return Atom("==", Tagged(Var(x1), 1), Tagged(Var(x2), 2))


def _guard(b, tag: int = 1) -> Atom:
    return Atom("==", Tagged(b, tag), RConst(True, BOOL))


def _int_const(k: int) -> RConst:
    return RConst(k, INT)


def _same_family(premises: List[Judgment], name: str) -> Flavor:
    f = premises[0].flavor
    for p in premises[1:]:
        if not p.flavor.same_family(f):
            _fail(f"{name}: premises use different flavors ({f} vs {p.flavor})")
    return f


def _want_kind(f: Flavor, kinds, name: str):
    if f.kind not in kinds:
        _fail(f"{name} needs a {'/'.join(kinds)} judgment, got {f.kind}")


def _literal(e) -> Optional[Fraction]:
    if isinstance(e, Lit) and e.ty in (INT, REAL):
        return Fraction(e.value)
    if isinstance(e, UnOp) and e.op == "-" and isinstance(e.arg, Lit) and e.arg.ty in (INT, REAL):
        return -Fraction(e.arg.value)
    return None


def _param(e1, e2, expected: Fraction, what: str) -> None:
    v1, v2 = _literal(e1), _literal(e2)
    if v1 is None or v2 is None:
        _side_fail(f"{what} must be a numeric literal in both programs")
    if v1 != expected or v2 != expected:
        _side_fail(f"{what} is {v1} / {v2} in the programs but {expected} in the side parameters")


def _samples(s: Side, dist_type, name: str):
    c1, c2 = s.cmd("left"), s.cmd("right")
    for c in (c1, c2):
        if not isinstance(c, Sample) or not isinstance(c.dist, dist_type):
            _fail(f"{name} applies to '<-$ {dist_type.__name__}(...)' on both sides")
        if c.index is not None:
            _fail(f"{name} needs a plain variable as the sampling target")
    return c1, c2


def _mech(s: Side, c1, c2, pre, flavor: Flavor) -> Judgment:
    return Judgment(s.ctx, c1, c2, pre, _eq_atom(c1.name, c2.name), flavor)


def _sens_pre(e1, e2, r: Fraction):
    return abs_le(RBin("-", Tagged(e1, 1), Tagged(e2, 2)), RConst(r, REAL))


def _bern_pre(e1, e2, p: Fraction):
    return And((Atom("==", Tagged(e1, 1), RConst(p, REAL)),
                Atom("==", RBin("-", RConst(Fraction(1), REAL), Tagged(e1, 1)), Tagged(e2, 2))))


def _nonneg(s: Side, key) -> Fraction:
    v = s.frac(key)
    if v < 0:
        _side_fail(f"{key} must be >= 0, got {v}")
    return v


def _positive(s: Side, key) -> Fraction:
    v = s.frac(key)
    if v <= 0:
        _side_fail(f"{key} must be > 0, got {v}")
    return v


# -- basic rules -------------------------------------------------------------------------


@rule("[skip]", "basic", inherits=("post", "flavor"))
def _skip(prem, s, env, ctx):
    phi = s.assertion("post")
    return Judgment(ctx, Skip(), Skip(), phi, phi, unit(s.flavor()))


@rule("[assn]", "basic", inherits=("left", "right", "post", "flavor"))
def _assn(prem, s, env, ctx):
    c1, c2 = s.cmd("left"), s.cmd("right")
    if not isinstance(c1, Assign) or not isinstance(c2, Assign):
        _fail("[assn] applies to deterministic assignments on both sides")
    psi = s.assertion("post")
    sub = assign_subst(c1.name, c1.index, c1.expr, 1)
    sub.update(assign_subst(c2.name, c2.index, c2.expr, 2))
    return Judgment(ctx, c1, c2, substitute(psi, sub, ctx), psi, unit(s.flavor()))


@rule("[seq]", "basic", arity=2)
def _seq(prem, s, env, ctx):
    a, b = prem
    _same_family(prem, "[seq]")
    if a.post != b.pre:
        _fail("[seq]: the first premise's post-condition differs from the second's pre-condition")
    return Judgment(ctx, seq(a.left, b.left), seq(a.right, b.right), a.pre, b.post,
                    compose(a.flavor, b.flavor))


@rule("[weak]", "basic", inherits=("pre", "post", "flavor"), arity=1)
def _weak(prem, s, env, ctx):
    (p,) = prem
    pre, post, f = s.assertion("pre"), s.assertion("post"), s.flavor()
    if not f.same_family(p.flavor):
        _fail(f"[weak] cannot change the flavor ({p.flavor} to {f})")
    if not leq(p.flavor, f):
        _fail(f"[weak] can only raise the grade ({p.flavor} to {f})", "BAD_GRADE_ARITHMETIC")
    cited = s.names("lemmas")
    env.entail(pre, p.pre, ctx, "[weak] pre-condition", cited)
    env.entail(p.post, post, ctx, "[weak] post-condition", cited)
    return Judgment(ctx, p.left, p.right, pre, post, f)


@rule("[cond]", "basic", inherits=("left", "right", "pre"), arity=2)
def _cond(prem, s, env, ctx):
    c1, c2 = s.cmd("left"), s.cmd("right")
    if not isinstance(c1, If) or not isinstance(c2, If):
        _fail("[cond] applies to conditionals on both sides")
    p, q = prem
    phi = s.assertion("pre")
    g = _guard(c1.cond)
    if (p.left, p.right, q.left, q.right) != (c1.then, c2.then, c1.orelse, c2.orelse):
        _fail("[cond]: premise programs are not the branches of the conditionals")
    if p.pre != And((phi, g)) or q.pre != And((phi, Not(g))):
        _fail("[cond]: premise pre-conditions must be pre && b@1 and pre && !b@1")
    if p.post != q.post:
        _fail("[cond]: premises have different post-conditions")
    _same_family(prem, "[cond]")
    if not grades_close(p.flavor, q.flavor):
        _fail("[cond]: premises have different grades", "BAD_GRADE_ARITHMETIC")
    env.entail(phi, Atom("==", Tagged(c1.cond, 1), Tagged(c2.cond, 2)), ctx, "[cond] guard agreement",
               s.names("lemmas"))
    return Judgment(ctx, c1, c2, phi, p.post, p.flavor)


@rule("[while]", "basic", inherits=("left", "right"), arity=None)
def _while(prem, s, env, ctx):
    c1, c2 = s.cmd("left"), s.cmd("right")
    if not isinstance(c1, While) or not isinstance(c2, While):
        _fail("[while] applies to loops on both sides")
    theta = s.assertion("invariant")
    e = s.expr("variant")
    n = s.int("n")
    if n < 0:
        _side_fail("[while]: n must be >= 0")
    if len(prem) != n:
        _fail(f"[while] with n={n} needs {n} premises, got {len(prem)}")
    for c in (c1, c2):
        if c.bound is not None and n > c.bound:
            _side_fail(f"[while]: n={n} exceeds the loop's declared bound {c.bound}")
    ev = Tagged(e, 1)
    for k, p in enumerate(prem):
        if (p.left, p.right) != (c1.body, c2.body):
            _fail(f"[while]: premise {k} is not about the loop bodies")
        want_pre = And((theta, Atom("==", ev, _int_const(k)), Atom("<=", ev, _int_const(n))))
        want_post = And((theta, Atom(">", ev, _int_const(k))))
        if p.pre != want_pre or p.post != want_post:
            _fail(f"[while]: premise {k} must go from inv && e@1 == {k} && e@1 <= {n} to inv && e@1 > {k}")
    if prem:
        _same_family(prem, "[while]")
    g = _guard(c1.cond)
    cited = s.names("lemmas")
    env.entail(theta, Atom("==", Tagged(c1.cond, 1), Tagged(c2.cond, 2)), ctx, "[while] guard agreement",
               cited)
    env.entail(And((theta, Atom(">=", ev, _int_const(n)))), Not(g), ctx, "[while] variant exit", cited)
    f = unit(prem[0].flavor) if prem else unit(s.flavor() if s.has("flavor") else _need_flavor(s))
    for p in prem:
        f = compose(f, p.flavor)
    return Judgment(ctx, c1, c2, And((theta, g, Atom(">=", ev, _int_const(0)))), And((theta, Not(g))), f)


def _need_flavor(s: Side):
    _side_fail("[while] with n=0 needs a flavor side parameter")


@rule("[case]", "basic", arity=2)
def _case(prem, s, env, ctx):
    p, q = prem
    if (p.left, p.right) != (q.left, q.right):
        _fail("[case]: premises are about different programs")
    if p.post != q.post:
        _fail("[case]: premises have different post-conditions")
    _same_family(prem, "[case]")
    if not grades_close(p.flavor, q.flavor):
        _fail("[case]: premises have different grades", "BAD_GRADE_ARITHMETIC")
    return Judgment(ctx, p.left, p.right, Or((p.pre, q.pre)), p.post, p.flavor)


# -- mechanisms -----------------------------------------------------------------------------


def _bern_eps(p: Fraction) -> float:
    if not 0 < p < 1:
        _side_fail(f"Bernoulli parameter must lie in (0, 1), got {p}")
    hi, lo = max(p, 1 - p), min(p, 1 - p)
    return math.log(hi) - math.log(lo)


@rule("[DP-Bern]", "mechanism", inherits=("left", "right"))
def _dp_bern(prem, s, env, ctx):
    c1, c2 = _samples(s, Bern, "[DP-Bern]")
    p = s.frac("p")
    return _mech(s, c1, c2, _bern_pre(c1.dist.p, c2.dist.p, p), DP(_bern_eps(p), 0))


@rule("[zCDP-Bern]", "mechanism", inherits=("left", "right"))
def _zcdp_bern(prem, s, env, ctx):
    c1, c2 = _samples(s, Bern, "[zCDP-Bern]")
    p = s.frac("p")
    return _mech(s, c1, c2, _bern_pre(c1.dist.p, c2.dist.p, p), ZCDP(_bern_eps(p), 0))


@rule("[RDP-Bern]", "mechanism", inherits=("left", "right", "flavor"))
def _rdp_bern(prem, s, env, ctx):
    c1, c2 = _samples(s, Bern, "[RDP-Bern]")
    f = s.flavor()
    _want_kind(f, ("RDP",), "[RDP-Bern]")
    p = s.frac("p")
    _bern_eps(p)
    a, pf = f.alpha, float(p)
    # Renyi divergence of Bern(p) from Bern(1-p), in log space
    terms = [a * math.log(pf) + (1 - a) * math.log(1 - pf), a * math.log(1 - pf) + (1 - a) * math.log(pf)]
    m = max(terms)
    rho = (m + math.log(sum(math.exp(t - m) for t in terms))) / (a - 1)
    return _mech(s, c1, c2, _bern_pre(c1.dist.p, c2.dist.p, p), RDP(a, rho))


def _bern_eq(kinds, name):
    def fn(prem, s, env, ctx):
        c1, c2 = _samples(s, Bern, name)
        f = s.flavor()
        _want_kind(f, kinds, name)
        return _mech(s, c1, c2, Atom("==", Tagged(c1.dist.p, 1), Tagged(c2.dist.p, 2)), unit(f))

    return fn


rule("[DP-Bern-Eq]", "mechanism", inherits=("left", "right", "flavor"))(_bern_eq(("DP",), "[DP-Bern-Eq]"))
rule("[RDP-Bern-Eq]", "mechanism", inherits=("left", "right", "flavor"))(_bern_eq(("RDP",), "[RDP-Bern-Eq]"))
rule("[zCDP-Bern-Eq]", "mechanism", inherits=("left", "right", "flavor"))(
    _bern_eq(("zCDP",), "[zCDP-Bern-Eq]"))


def _lap(s, name):
    c1, c2 = _samples(s, Lap, name)
    lam = _positive(s, "lambda")
    _param(c1.dist.scale, c2.dist.scale, lam, "the Laplace scale")
    return c1, c2, lam


@rule("[DP-Lap]", "mechanism", inherits=("left", "right"))
def _dp_lap(prem, s, env, ctx):
    c1, c2, lam = _lap(s, "[DP-Lap]")
    r = _nonneg(s, "r")
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, r), DP(float(r / lam), 0))


@rule("[zCDP-Lap]", "mechanism", inherits=("left", "right"))
def _zcdp_lap(prem, s, env, ctx):
    c1, c2, lam = _lap(s, "[zCDP-Lap]")
    r = _nonneg(s, "r")
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, r), ZCDP(float(r / lam), 0))


@rule("[RDP-Lap]", "mechanism", inherits=("left", "right", "flavor"))
def _rdp_lap(prem, s, env, ctx):
    c1, c2, lam = _lap(s, "[RDP-Lap]")
    f = s.flavor()
    _want_kind(f, ("RDP",), "[RDP-Lap]")
    a, l = f.alpha, float(lam)
    t1 = math.log(a / (2 * a - 1)) + (a - 1) / l
    t2 = math.log((a - 1) / (2 * a - 1)) - a / l
    m = max(t1, t2)
    rho = (m + math.log(math.exp(t1 - m) + math.exp(t2 - m))) / (a - 1)
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, Fraction(1)), RDP(a, rho))


def _gauss(s, name):
    c1, c2 = _samples(s, Gauss, name)
    var = _positive(s, "sigma2")
    _param(c1.dist.var, c2.dist.var, var, "the Gaussian variance")
    return c1, c2, var


@rule("[RDP-G]", "mechanism", inherits=("left", "right", "flavor"))
def _rdp_g(prem, s, env, ctx):
    c1, c2, var = _gauss(s, "[RDP-G]")
    f = s.flavor()
    _want_kind(f, ("RDP",), "[RDP-G]")
    r = _nonneg(s, "r")
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, r),
                 RDP(f.alpha, f.alpha * float(r * r / (2 * var))))


@rule("[zCDP-G]", "mechanism", inherits=("left", "right"))
def _zcdp_g(prem, s, env, ctx):
    c1, c2, var = _gauss(s, "[zCDP-G]")
    r = _nonneg(s, "r")
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, r), ZCDP(0, float(r * r / (2 * var))))


@rule("[tCDP-G]", "mechanism", inherits=("left", "right", "flavor"))
def _tcdp_g(prem, s, env, ctx):
    c1, c2, var = _gauss(s, "[tCDP-G]")
    f = s.flavor()
    _want_kind(f, ("tCDP",), "[tCDP-G]")
    r = _nonneg(s, "r")
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, r), TCDP(f.omega, float(r * r / (2 * var))))


C_MIN = (1 + math.sqrt(3)) / 2


def dp_gauss_min_c(delta: float) -> float:
    """Smallest admissible c for the Gaussian DP rule at this delta."""
    need = 2 * math.log(0.66 / delta)
    return max(C_MIN + 1e-12, math.sqrt(need) if need > 0 else 0.0)


@rule("[DP-G]", "mechanism", inherits=("left", "right"))
def _dp_g(prem, s, env, ctx):
    c1, c2, var = _gauss(s, "[DP-G]")
    r = _nonneg(s, "r")
    eps, delta = s.real("epsilon"), s.real("delta")
    if not eps > 0 or not 0 < delta < 1:
        _side_fail(f"[DP-G] needs epsilon > 0 and 0 < delta < 1, got {eps}, {delta}")
    c = dp_gauss_min_c(delta)
    sigma = math.sqrt(float(var))
    if c * float(r) / eps > sigma * (1 + 1e-12):
        _side_fail(f"[DP-G]: c*r/epsilon = {c * float(r) / eps:.6g} exceeds sigma = {sigma:.6g}")
    return _mech(s, c1, c2, _sens_pre(c1.dist.mean, c2.dist.mean, r), DP(eps, delta))


@rule("[tCDP-SinhG]", "mechanism", inherits=("left", "right"))
def _tcdp_sinhg(prem, s, env, ctx):
    c1, c2 = _samples(s, SinhGauss, "[tCDP-SinhG]")
    A, r, rho = _positive(s, "A"), _positive(s, "r"), _positive(s, "rho")
    _param(c1.dist.A, c2.dist.A, A, "the SinhNormal magnitude A")
    _param(c1.dist.var, c2.dist.var, r * r / (2 * rho), "the SinhNormal variance r^2/(2 rho)")
    inv = 1 / math.sqrt(float(rho))
    if not (1 < inv and inv <= float(A / r) * (1 + 1e-12)):
        _side_fail(f"[tCDP-SinhG] needs 1 < 1/sqrt(rho) <= A/r, got 1/sqrt(rho)={inv:.6g}, A/r={float(A / r):.6g}")
    return _mech(s, c1, c2, _sens_pre(c1.dist.center, c2.dist.center, r),
                 TCDP(float(A / (8 * r)), float(16 * rho)))


# -- transitivity ----------------------------------------------------------------------------


def _chain(prem, name):
    p, q = prem
    if p.right != q.left:
        _fail(f"{name}: the middle programs differ")
    posts = []
    for j in prem:
        a = j.post
        if not (isinstance(a, Atom) and a.op == "==" and isinstance(a.left, Tagged)
                and isinstance(a.right, Tagged) and isinstance(a.left.expr, Var)
                and isinstance(a.right.expr, Var) and (a.left.tag, a.right.tag) == (1, 2)):
            _fail(f"{name}: premise post-conditions must be x@1 == y@2")
        posts.append((a.left.expr.name, a.right.expr.name))
    if posts[0][1] != posts[1][0]:
        _fail(f"{name}: the middle output variables differ")
    return Comp(p.pre, q.pre), _eq_atom(posts[0][0], posts[1][1])


@rule("[DP-Trans]", "transitivity", arity=2)
def _dp_trans(prem, s, env, ctx):
    pre, post = _chain(prem, "[DP-Trans]")
    f1, f2 = prem[0].flavor, prem[1].flavor
    _want_kind(f1, ("DP",), "[DP-Trans]")
    _want_kind(f2, ("DP",), "[DP-Trans]")
    e1, d1, e2, d2 = f1.epsilon, f1.delta, f2.epsilon, f2.delta
    delta = max(math.exp(e2) * d1 + d2, math.exp(e1) * d2 + d1)
    return Judgment(ctx, prem[0].left, prem[1].right, pre, post, DP(e1 + e2, delta))


@rule("[RDP-Trans]", "transitivity", inherits=("flavor",), arity=2)
def _rdp_trans(prem, s, env, ctx):
    pre, post = _chain(prem, "[RDP-Trans]")
    f1, f2 = prem[0].flavor, prem[1].flavor
    _want_kind(f1, ("RDP",), "[RDP-Trans]")
    _want_kind(f2, ("RDP",), "[RDP-Trans]")
    f = s.flavor()
    _want_kind(f, ("RDP",), "[RDP-Trans]")
    a = f.alpha
    p = s.real("p")
    if not p > 1:
        _side_fail(f"[RDP-Trans] needs p > 1, got {p}")
    q = p / (p - 1)  # 1/p + 1/q = 1, and q > 1 follows
    if s.has("q") and not close(s.real("q"), q):
        _side_fail(f"[RDP-Trans]: 1/p + 1/q must equal 1 (p={p}, q={s.real('q')})")
    if not close(f1.alpha, p * a):
        _fail(f"[RDP-Trans]: the first premise must be at order p*alpha = {p * a}, got {f1.alpha}")
    if not close(f2.alpha, q * (p * a - 1) / p):
        _fail(f"[RDP-Trans]: the second premise must be at order q(p*alpha-1)/p = {q * (p * a - 1) / p}, "
              f"got {f2.alpha}")
    rho = (p * a - 1) * f1.rho / (p * (a - 1)) + f2.rho
    return Judgment(ctx, prem[0].left, prem[1].right, pre, post, RDP(a, rho))


def group_coefficient(k: int, xi: float) -> float:
    """Default xi-coefficient for k-fold zCDP group privacy (k(k+1)/2 * xi)."""
    return xi * k * (k + 1) / 2


@rule("[zCDP-Trans]", "transitivity", arity=2,
      note="EXPERIMENTAL: the xi coefficient is g(k, xi) = xi*k(k+1)/2")
def _zcdp_trans(prem, s, env, ctx):
    pre, post = _chain(prem, "[zCDP-Trans]")
    f1, f2 = prem[0].flavor, prem[1].flavor
    _want_kind(f1, ("zCDP",), "[zCDP-Trans]")
    _want_kind(f2, ("zCDP",), "[zCDP-Trans]")
    k = s.int("k")
    if k < 2:
        _side_fail(f"[zCDP-Trans] needs k >= 2, got {k}")
    xi, rho = f2.xi, f2.rho
    if not (close(f1.xi, group_coefficient(k - 1, xi)) and close(f1.rho, (k - 1) ** 2 * rho)):
        _fail(f"[zCDP-Trans]: the first premise must be graded ({group_coefficient(k - 1, xi)}, "
              f"{(k - 1) ** 2 * rho}) for k={k}", "BAD_GRADE_ARITHMETIC")
    env.experimental.append({"rule": "[zCDP-Trans]", "path": env.path,
                             "detail": RULES["[zCDP-Trans]"].note})
    return Judgment(ctx, prem[0].left, prem[1].right, pre, post,
                    ZCDP(group_coefficient(k, xi), k * k * rho))


# -- conversions --------------------------------------------------------------------------------


def _lossless(p: Judgment, s: Side, env: Env, name: str):
    if s.data.get("lossless") is not True:
        _side_fail(f"{name} needs both programs lossless (side 'lossless': true)")
    if not (loops_bounded(p.left) and loops_bounded(p.right)):
        _side_fail(f"{name}: losslessness needs every loop to carry a 'bound'")
    env.assume("lossless", rule=name)


def _delta(s: Side, name: str) -> float:
    d = s.real("delta")
    if not 0 < d < 1:
        _side_fail(f"{name} needs 0 < delta < 1, got {d}")
    return d


@rule("[D/z]", "conversion", arity=1)
def _d_z(prem, s, env, ctx):
    (p,) = prem
    f = p.flavor
    if f.kind == "DP":
        if f.delta != 0:
            _fail("[D/z] converts pure (epsilon, 0)-DP only")
        out = ZCDP(f.epsilon, 0)
    elif f.kind == "zCDP":
        if f.rho != 0:
            _fail("[D/z] converts (xi, 0)-zCDP back to DP only")
        out = DP(f.xi, 0)
    else:
        _fail(f"[D/z] relates DP and zCDP, got {f.kind}")
    _lossless(p, s, env, "[D/z]")
    return Judgment(ctx, p.left, p.right, p.pre, p.post, out)


@rule("[z/R]", "conversion", arity=1)
def _z_r(prem, s, env, ctx):
    (p,) = prem
    _want_kind(p.flavor, ("zCDP",), "[z/R]")
    if p.flavor.xi != 0:
        _fail("[z/R] needs a (0, rho)-zCDP premise")
    a = s.real("alpha")
    if not a > 1:
        _side_fail(f"[z/R] needs alpha > 1, got {a}")
    return Judgment(ctx, p.left, p.right, p.pre, p.post, RDP(a, p.flavor.rho))


@rule("[z/D]", "conversion", arity=1)
def _z_d(prem, s, env, ctx):
    (p,) = prem
    _want_kind(p.flavor, ("zCDP",), "[z/D]")
    d = _delta(s, "[z/D]")
    _lossless(p, s, env, "[z/D]")
    return Judgment(ctx, p.left, p.right, p.pre, p.post, DP(zcdp_to_dp(p.flavor.xi, p.flavor.rho, d), d))


@rule("[t/D]", "conversion", arity=1)
def _t_d(prem, s, env, ctx):
    (p,) = prem
    _want_kind(p.flavor, ("tCDP",), "[t/D]")
    d = _delta(s, "[t/D]")
    _lossless(p, s, env, "[t/D]")
    return Judgment(ctx, p.left, p.right, p.pre, p.post, DP(tcdp_to_dp(p.flavor.omega, p.flavor.rho, d), d))


@rule("[R/D]", "conversion", arity=1)
def _r_d(prem, s, env, ctx):
    (p,) = prem
    _want_kind(p.flavor, ("RDP",), "[R/D]")
    d = _delta(s, "[R/D]")
    _lossless(p, s, env, "[R/D]")
    return Judgment(ctx, p.left, p.right, p.pre, p.post, DP(rdp_to_dp(p.flavor.alpha, p.flavor.rho, d), d))


def zcdp_to_dp(xi: float, rho: float, delta: float) -> float:
    return xi + rho + 2 * math.sqrt(rho * math.log(1 / delta))


def tcdp_to_dp(omega: float, rho: float, delta: float) -> float:
    L = math.log(1 / delta)
    beta = omega if rho == 0 else min(omega, 1 + math.sqrt(L / rho))
    return rho * beta + L / (beta - 1)


def rdp_to_dp(alpha: float, rho: float, delta: float) -> float:
    return rho - math.log(delta) / (alpha - 1)


# -- extensions ----------------------------------------------------------------------------------


def _gauss_eq(kinds, name):
    def fn(prem, s, env, ctx):
        c1, c2, var = _gauss(s, name)
        f = s.flavor()
        _want_kind(f, kinds, name)
        return _mech(s, c1, c2, Atom("==", Tagged(c1.dist.mean, 1), Tagged(c2.dist.mean, 2)), unit(f))

    return fn


rule("[zCDP-G-Eq]", "extension", inherits=("left", "right", "flavor"))(_gauss_eq(("zCDP",), "[zCDP-G-Eq]"))
rule("[RDP-G-Eq]", "extension", inherits=("left", "right", "flavor"))(_gauss_eq(("RDP",), "[RDP-G-Eq]"))
rule("[tCDP-G-Eq]", "extension", inherits=("left", "right", "flavor"))(_gauss_eq(("tCDP",), "[tCDP-G-Eq]"))


def assertion_vars(phi) -> set:
    """{(name, tag)} read by an assertion."""
    out = set()

    def term(t):
        if isinstance(t, Tagged):
            out.update((n, t.tag) for n in expr_vars(t.expr))
        elif isinstance(t, RBin):
            term(t.left)
            term(t.right)

    def walk(f):
        if isinstance(f, Atom):
            term(f.left)
            term(f.right)
        elif isinstance(f, (And, Or)):
            for x in f.items:
                walk(x)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, Comp):
            _fail("a framed assertion cannot be a relational composition")

    walk(phi)
    return out


@rule("[frame]", "extension", arity=1)
def _frame(prem, s, env, ctx):
    (p,) = prem
    theta = s.assertion("frame")
    read = assertion_vars(theta)
    clash = sorted({n for n, t in read if t == 1} & modified_vars(p.left)) + \
        sorted({n for n, t in read if t == 2} & modified_vars(p.right))
    if clash:
        _side_fail(f"[frame]: the frame mentions modified variables {clash}")
    return Judgment(ctx, p.left, p.right, And((p.pre, theta)), And((p.post, theta)), p.flavor)


@rule("[assume]", "extension", inherits=("left", "right", "pre", "post", "flavor"))
def _assume(prem, s, env, ctx):
    label = s.raw("label")
    j = Judgment(ctx, s.cmd("left"), s.cmd("right"), s.assertion("pre"), s.assertion("post"), s.flavor())
    env.assume("judgment", label=str(label), judgment=j.to_json())
    return j
