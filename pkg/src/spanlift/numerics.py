"""Extended reals and weight functions.

Extended reals are plain floats restricted to finite values and +/-inf.
NaN never escapes from this module: ``ext_add`` resolves the indeterminate
sum (+inf) + (-inf) to -inf, which is the convention the divergence
properties are stated under.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .errors import InvalidParam, NumericLimitDiverged

INF = math.inf
NEG_INF = -math.inf

LIMIT_STEPS = 60
LIMIT_TOL = 1e-10


def ext_add(a: float, b: float) -> float:
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def ext_sum(values: Iterable[float]) -> float:
    """Fold of ext_add, computed order-independently (fsum on the finite part)."""
    vals = list(values)
    if NEG_INF in vals:
        return NEG_INF
    if INF in vals:
        return INF
    return math.fsum(vals)


def ext_sub(a: float, b: float) -> float:
    """a - b with the same absorbing convention (used for slack margins)."""
    return ext_add(a, -b)


@dataclass(frozen=True)
class WeightFn:
    """A convex weight function f on [0, inf).

    ``recession`` is lim_{s->inf} f(s)/s when known in closed form; it is what
    the perspective at q = 0 reduces to.  Unregistered functions leave it as
    None and fall back to a numeric limit.
    """

    eval: Callable[[float], float]
    name: str = "f"
    recession: Optional[float] = None
    convexity_witnesses: tuple = ()

    def __call__(self, t: float) -> float:
        return self.eval(t)


def weight_dp(epsilon: float) -> WeightFn:
    if not epsilon >= 0:
        raise InvalidParam(f"epsilon must be >= 0, got {epsilon}")
    scale = math.exp(epsilon)
    return WeightFn(lambda t: max(0.0, 1.0 - scale * t), f"DP({epsilon})", 0.0)


def weight_renyi(alpha: float) -> WeightFn:
    if not alpha > 1:
        raise InvalidParam(f"alpha must be > 1, got {alpha}")

    def f(t: float) -> float:
        try:
            return t ** alpha
        except OverflowError:
            return INF

    return WeightFn(f, f"t^{alpha}", INF)


def _numeric_limit(p: float, f: WeightFn) -> float:
    prev = None
    for k in range(1, LIMIT_STEPS + 1):
        t = 2.0 ** -k
        cur = t * f(p / t)
        if prev is not None and abs(cur - prev) < LIMIT_TOL:
            return cur
        prev = cur
    raise NumericLimitDiverged(f"t*f({p}/t) did not settle for {f.name}")


def perspective(q: float, p: float, f: WeightFn) -> float:
    """q * f(p / q) with the boundary conventions at q = 0."""
    if q < 0 or p < 0 or math.isinf(q) or math.isinf(p):
        raise InvalidParam("perspective needs finite nonnegative arguments")
    if q > 0:
        return q * f(p / q)
    if p == 0:
        return 0.0
    if f.recession is not None:
        if f.recession == 0:
            return 0.0
        return f.recession * p
    return _numeric_limit(p, f)


def check_convexity(f: WeightFn, triples: Sequence[tuple] = (), tol: float = 1e-12) -> list:
    """Return the triples (a, b, lam) that violate convexity of f.

    A tolerance relative to the magnitude of the chord absorbs rounding for
    fast-growing functions such as t^alpha.
    """
    bad = []
    for a, b, lam in list(triples) or list(f.convexity_witnesses):
        lhs = f(lam * a + (1 - lam) * b)
        rhs = lam * f(a) + (1 - lam) * f(b)
        if lhs > rhs + tol * max(1.0, abs(rhs)):
            bad.append((a, b, lam))
    return bad


def logsumexp(xs: Sequence[float]) -> float:
    if not xs:
        return NEG_INF
    m = max(xs)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))
