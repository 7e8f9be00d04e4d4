"""Discrete semantics of pWHILE: commands as transformers of SubDists over memories.

A memory is a tuple aligned with the typing context.  Reals are exact
``Fraction`` values, so deterministic arithmetic never rounds and equal
memories reached along different paths merge exactly.  Continuous samplers
are replaced by their bin masses on a per-site grid (the site is the name of
the sampled variable); loops are unrolled at most ``fuel`` times and the
mass still looping afterwards is dropped and reported as residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Optional

from .dist import (Gaussian, GridSpec, Laplace, SinhNormal, SubDist,
                   discretize_density)
from .errors import InvalidParam, MissingGrid
from .lang.ast import (BOOL, INT, REAL, Assign, Bern, BinOp, Cmp, Context, Dirac, Gauss, If,
                       Index, Lap, Lit, Sample, Seq, SinhGauss, Skip, UnOp, Update, Var,
                       VecLit, VecTy, While)


@dataclass
class InterpConfig:
    fuel: int = 64
    grids: Dict[str, GridSpec] = field(default_factory=dict)
    default_grid: Optional[GridSpec] = None
    dust_tol: float = 1e-9
    # Masses at or below this are dropped into the tail figure.  The default
    # keeps everything: pruning one side of a paired run can break support
    # alignment and send a Renyi divergence to +inf.
    prune: float = 0.0

    def __post_init__(self):
        if self.fuel < 1:
            raise InvalidParam("fuel must be >= 1")
        if not 0 <= self.dust_tol <= 1e-6:
            raise InvalidParam("dust_tol must lie in [0, 1e-6]")

    def grid_for(self, site: str) -> GridSpec:
        g = self.grids.get(site, self.default_grid)
        if g is None:
            raise MissingGrid(f"no grid declared for sampler site {site!r}", site=site)
        return g


@dataclass
class RunStats:
    residual: float = 0.0
    tail: float = 0.0
    # Exact rational arithmetic never rounds; kept for the report schema.
    rounding: float = 0.0


class HTuple(tuple):
    """Tuple that caches its hash.

    Memories are dict keys that get hashed on every lookup, and hashing a
    Fraction is expensive; caching per memory and per vector pays off
    because most slots are shared between a memory and its successors.
    """

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            self._h = h = tuple.__hash__(self)
            return h


class Real(Fraction):
    """Fraction with a cached hash; equal to and hashed like Fraction."""

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            self._h = h = Fraction.__hash__(self)
            return h


def _store(v):
    return Real(v) if type(v) is Fraction else v


# -- expressions --------------------------------------------------------------


def _clamp(k: int, n: int) -> int:
    return min(max(k, 0), n - 1)


def _div(a, b):
    if b == 0:
        return type(a)(0)
    if isinstance(a, int) and isinstance(b, int):
        return a // b
    return Fraction(a) / Fraction(b)


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "min": min,
    "max": max,
}

_CMP = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def eval_expr(e, m: tuple, ctx: Context):
    if isinstance(e, Var):
        return m[ctx.index(e.name)]
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, BinOp):
        if e.op == "&&":
            return bool(eval_expr(e.left, m, ctx)) and bool(eval_expr(e.right, m, ctx))
        if e.op == "||":
            return bool(eval_expr(e.left, m, ctx)) or bool(eval_expr(e.right, m, ctx))
        return _ARITH[e.op](eval_expr(e.left, m, ctx), eval_expr(e.right, m, ctx))
    if isinstance(e, Cmp):
        return _CMP[e.op](eval_expr(e.left, m, ctx), eval_expr(e.right, m, ctx))
    if isinstance(e, UnOp):
        v = eval_expr(e.arg, m, ctx)
        return (not v) if e.op == "!" else -v
    if isinstance(e, Index):
        arr = eval_expr(e.arr, m, ctx)
        return arr[_clamp(eval_expr(e.idx, m, ctx), len(arr))]
    if isinstance(e, Update):
        arr = eval_expr(e.arr, m, ctx)
        k = _clamp(eval_expr(e.idx, m, ctx), len(arr))
        return HTuple(arr[:k] + (eval_expr(e.val, m, ctx),) + arr[k + 1:])
    if isinstance(e, VecLit):
        return HTuple(eval_expr(x, m, ctx) for x in e.items)
    raise TypeError(f"not an expression: {e!r}")


@lru_cache(maxsize=4096)
def _discretized(model, grid: GridSpec) -> SubDist:
    d = discretize_density(model, grid)
    return SubDist({_store(v): w for v, w in d.items()}, dust=d.dust)


def eval_pexpr(nu, m: tuple, ctx: Context, cfg: InterpConfig, site: str = "") -> SubDist:
    if isinstance(nu, Dirac):
        return SubDist({eval_expr(nu.arg, m, ctx): 1.0})
    if isinstance(nu, Bern):
        p = float(eval_expr(nu.p, m, ctx))
        if not 0 <= p <= 1:
            raise InvalidParam(f"Bern parameter {p} outside [0, 1]")
        return SubDist({True: p, False: 1 - p})
    grid = cfg.grid_for(site)
    if isinstance(nu, Lap):
        model = Laplace(float(eval_expr(nu.mean, m, ctx)), float(eval_expr(nu.scale, m, ctx)))
    elif isinstance(nu, Gauss):
        model = Gaussian(float(eval_expr(nu.mean, m, ctx)), float(eval_expr(nu.var, m, ctx)))
    elif isinstance(nu, SinhGauss):
        model = SinhNormal(float(eval_expr(nu.center, m, ctx)), float(eval_expr(nu.A, m, ctx)),
                           float(eval_expr(nu.var, m, ctx)))
    else:
        raise TypeError(f"not a distribution: {nu!r}")
    return _discretized(model, grid)


# -- commands -------------------------------------------------------------------


def _write(m: tuple, ctx: Context, name: str, index, value) -> tuple:
    k = ctx.index(name)
    value = _store(value)
    if index is not None:
        arr = m[k]
        j = _clamp(eval_expr(index, m, ctx), len(arr))
        value = HTuple(arr[:j] + (value,) + arr[j + 1:])
    return HTuple(m[:k] + (value,) + m[k + 1:])


def _exec(c, mu: Dict[tuple, float], ctx: Context, cfg: InterpConfig, stats: RunStats) -> Dict[tuple, float]:
    if isinstance(c, Skip):
        return mu
    if isinstance(c, Assign):
        out: Dict[tuple, float] = {}
        for m, w in mu.items():
            m2 = _write(m, ctx, c.name, c.index, eval_expr(c.expr, m, ctx))
            out[m2] = out.get(m2, 0.0) + w
        return out
    if isinstance(c, Sample):
        out = {}
        for m, w in mu.items():
            d = eval_pexpr(c.dist, m, ctx, cfg, c.name)
            stats.tail += w * d.dust
            for v, p in d.items():
                m2 = _write(m, ctx, c.name, c.index, v)
                out[m2] = out.get(m2, 0.0) + w * p
        return _prune(out, stats, cfg.prune) if cfg.prune > 0 else out
    if isinstance(c, Seq):
        for x in c.items:
            mu = _exec(x, mu, ctx, cfg, stats)
        return mu
    if isinstance(c, If):
        yes, no = _split(c.cond, mu, ctx)
        a = _exec(c.then, yes, ctx, cfg, stats)
        b = _exec(c.orelse, no, ctx, cfg, stats)
        for m, w in b.items():
            a[m] = a.get(m, 0.0) + w
        return a
    if isinstance(c, While):
        done: Dict[tuple, float] = {}
        cur = mu
        for _ in range(cfg.fuel):
            yes, no = _split(c.cond, cur, ctx)
            for m, w in no.items():
                done[m] = done.get(m, 0.0) + w
            if not yes:
                return done
            cur = _exec(c.body, yes, ctx, cfg, stats)
        yes, no = _split(c.cond, cur, ctx)
        for m, w in no.items():
            done[m] = done.get(m, 0.0) + w
        stats.residual += math.fsum(yes.values())
        return done
    raise TypeError(f"not a command: {c!r}")


def _prune(out: Dict[tuple, float], stats: RunStats, threshold: float) -> Dict[tuple, float]:
    dropped = [m for m, w in out.items() if w <= threshold]
    for m in dropped:
        stats.tail += out.pop(m)
    return out


def _split(cond, mu, ctx):
    yes, no = {}, {}
    for m, w in mu.items():
        (yes if eval_expr(cond, m, ctx) else no)[m] = w
    return yes, no


def eval_cmd(c, mu: SubDist, ctx: Context, cfg: InterpConfig, stats: Optional[RunStats] = None) -> SubDist:
    stats = stats if stats is not None else RunStats()
    out = _exec(c, dict(mu.items()), ctx, cfg, stats)
    return SubDist(out, dust=mu.dust + stats.tail)


# -- memories -------------------------------------------------------------------


def default_value(ty):
    if isinstance(ty, VecTy):
        return HTuple(default_value(ty.elem) for _ in range(ty.dim))
    return {BOOL: False, INT: 0, REAL: Real(0)}[ty]


def coerce_value(v, ty):
    """Convert a JSON-ish value to the memory representation of ``ty``."""
    if isinstance(ty, VecTy):
        if not isinstance(v, (list, tuple)) or len(v) != ty.dim:
            raise InvalidParam(f"expected a list of length {ty.dim} for {ty}, got {v!r}")
        return HTuple(coerce_value(x, ty.elem) for x in v)
    if ty == BOOL:
        if not isinstance(v, bool):
            raise InvalidParam(f"expected bool, got {v!r}")
        return v
    if ty == INT:
        if isinstance(v, bool) or not isinstance(v, int):
            raise InvalidParam(f"expected int, got {v!r}")
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float, str, Fraction)):
        raise InvalidParam(f"expected a real, got {v!r}")
    try:
        return Real(repr(v)) if isinstance(v, float) else Real(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidParam(f"bad real {v!r}") from exc


def make_memory(ctx: Context, values: Optional[dict] = None) -> tuple:
    """Memory with the given slots set and every other slot at its type's zero."""
    values = dict(values or {})
    unknown = set(values) - set(ctx.names())
    if unknown:
        raise InvalidParam(f"unknown variables in memory: {sorted(unknown)}")
    return HTuple(coerce_value(values[n], t) if n in values else default_value(t) for n, t in ctx)


def memory_to_json(m: tuple, ctx: Context) -> dict:
    def conv(v):
        if isinstance(v, tuple):
            return [conv(x) for x in v]
        if isinstance(v, Fraction):
            return str(v)
        return v

    return {n: conv(v) for (n, _), v in zip(ctx, m)}


# -- driver -------------------------------------------------------------------


def run(c, ctx: Context, m: tuple, cfg: InterpConfig):
    """Run c from a point memory; returns (output SubDist, report dict)."""
    stats = RunStats()
    out = eval_cmd(c, SubDist({m: 1.0}), ctx, cfg, stats)
    report = {
        "output_support_size": len(out),
        "residual_mass": stats.residual,
        "rounding_dust": stats.rounding,
        "tail": out.dust,
        "fuel_exhausted": stats.residual > cfg.dust_tol,
    }
    return out, report


def project(mu: SubDist, ctx: Context, name: str) -> SubDist:
    k = ctx.index(name)
    acc: dict = {}
    for m, w in mu.items():
        acc[m[k]] = acc.get(m[k], 0.0) + w
    return SubDist(acc, dust=mu.dust)


def lossless_check(c, ctx: Context, inputs: Iterable[tuple], cfg: InterpConfig):
    """Empirical losslessness: (passed, worst residual) over the given inputs."""
    worst = 0.0
    for m in inputs:
        _, rep = run(c, ctx, m, cfg)
        worst = max(worst, rep["residual_mass"])
    return worst <= cfg.dust_tol, worst
