"""Divergences between finite subprobability distributions.

Rényi-type quantities are computed in log space so that very large orders
(the zCDP/tCDP suprema probe alpha up to 1e6) do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .dist import Gaussian, SubDist, bind, product
from .errors import (InvalidParam, InvalidPartition, UndefinedLoss, UnsupportedPair,
                     UnsupportedProperty)
from .numerics import INF, NEG_INF, WeightFn, ext_add, ext_sum, perspective

SLACK = 1e-9


# -- divergence specs -------------------------------------------------------


@dataclass(frozen=True)
class FDiv:
    f: WeightFn


@dataclass(frozen=True)
class DPDiv:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise InvalidParam("DP epsilon must be >= 0")


@dataclass(frozen=True)
class RenyiDiv:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise InvalidParam("Renyi order must be > 1")


@dataclass(frozen=True)
class ZCDPDiv:
    xi: float

    def __post_init__(self):
        if not self.xi >= 0:
            raise InvalidParam("zCDP xi must be >= 0")


@dataclass(frozen=True)
class TCDPDiv:
    omega: float

    def __post_init__(self):
        if not self.omega > 1:
            raise InvalidParam("tCDP omega must be > 1")


DivergenceSpec = FDiv | DPDiv | RenyiDiv | ZCDPDiv | TCDPDiv


def spec_family(spec) -> str:
    return {FDiv: "FDIV", DPDiv: "DP", RenyiDiv: "RENYI", ZCDPDiv: "ZCDP", TCDPDiv: "TCDP"}[type(spec)]


def spec_params(spec) -> dict:
    if isinstance(spec, FDiv):
        return {"f": spec.f.name}
    return {k: getattr(spec, k) for k in spec.__dataclass_fields__}


def _align(mu1: SubDist, mu2: SubDist):
    keys = list(set(mu1) | set(mu2))
    p = np.fromiter((mu1[k] for k in keys), float, len(keys))
    q = np.fromiter((mu2[k] for k in keys), float, len(keys))
    return p, q


# -- f-divergences ----------------------------------------------------------


def f_divergence(f: WeightFn, mu1: SubDist, mu2: SubDist) -> float:
    return ext_sum(perspective(mu2[x], mu1[x], f) for x in set(mu1) | set(mu2))


def dp_divergence(epsilon: float, mu1: SubDist, mu2: SubDist) -> float:
    if not epsilon >= 0:
        raise InvalidParam("epsilon must be >= 0")
    p, q = _align(mu1, mu2)
    return float(math.fsum(np.maximum(0.0, q - math.exp(epsilon) * p)))


def hockey_stick(mu1: SubDist, mu2: SubDist, epsilon: float) -> float:
    """Standard-order hockey stick: sum max(0, mu1 - e^eps mu2)."""
    return dp_divergence(epsilon, mu2, mu1)


class _LogTerms:
    """log p and log q on the common support, precomputed once per pair.

    ``status`` is +inf on a support mismatch (some p > 0 where q = 0), -inf
    when the supports do not meet, and None otherwise.
    """

    __slots__ = ("status", "lp", "lq", "pairs")

    # Below this many atoms plain floats beat numpy's per-call overhead.
    SMALL = 64

    def __init__(self, p: np.ndarray, q: np.ndarray):
        self.status = None
        if np.any((p > 0) & (q == 0)):
            self.status = INF
            return
        both = (p > 0) & (q > 0)
        if not np.any(both):
            self.status = NEG_INF
            return
        self.lp = np.log(p[both])
        self.lq = np.log(q[both])
        # t(alpha) = lq + alpha (lp - lq), kept as plain float pairs for small supports
        self.pairs = (list(zip(self.lq.tolist(), (self.lp - self.lq).tolist()))
                      if len(self.lp) <= self.SMALL else None)

    def log_moment(self, alpha: float) -> float:
        """log sum p^alpha q^(1-alpha), max-shifted."""
        if self.status is not None:
            return self.status
        if self.pairs is not None:
            ts = [b + alpha * d for b, d in self.pairs]
            m = max(ts)
            return m + math.log(sum([math.exp(t - m) for t in ts]))
        t = alpha * self.lp + (1 - alpha) * self.lq
        m = t.max()
        return float(m + math.log(np.exp(t - m).sum()))

    def renyi(self, alpha: float) -> float:
        lm = self.log_moment(alpha)
        return lm if math.isinf(lm) else lm / (alpha - 1)

    def renyi_many(self, alphas: np.ndarray) -> np.ndarray:
        if self.status is not None:
            return np.full(len(alphas), self.status)
        out = np.empty(len(alphas))
        step = max(1, 2_000_000 // max(len(self.lp), 1))
        for i in range(0, len(alphas), step):
            a = alphas[i:i + step, None]
            t = a * self.lp[None, :] + (1 - a) * self.lq[None, :]
            m = t.max(axis=1, keepdims=True)
            out[i:i + step] = (m[:, 0] + np.log(np.exp(t - m).sum(axis=1))) / (a[:, 0] - 1)
        return out


def _renyi_aligned(alpha: float, p: np.ndarray, q: np.ndarray) -> float:
    return _LogTerms(p, q).renyi(alpha)


def renyi_divergence(alpha: float, mu1: SubDist, mu2: SubDist) -> float:
    if not alpha > 1:
        raise InvalidParam("alpha must be > 1")
    p, q = _align(mu1, mu2)
    return _renyi_aligned(alpha, p, q)


def renyi_closed_form(alpha: float, m1, m2) -> float:
    if not alpha > 1:
        raise InvalidParam("alpha must be > 1")
    if isinstance(m1, Gaussian) and isinstance(m2, Gaussian) and m1.var == m2.var:
        r = float(m1.mean) - float(m2.mean)
        return alpha * r * r / (2 * float(m1.var))
    raise UnsupportedPair("closed form only for Gaussians with equal variance")


def _kl_aligned(p: np.ndarray, q: np.ndarray) -> float:
    if np.any((p > 0) & (q == 0)):
        return INF
    both = p > 0
    return float(math.fsum(p[both] * (np.log(p[both]) - np.log(q[both]))))


# -- suprema over the order --------------------------------------------------

GRID_POINTS = 200
ALPHA_MIN_OFFSET = 1e-6
ALPHA_MAX = 1e6
BRACKET = 1e-6
_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass
class SupCertificate:
    argmax_alpha: float
    value: float
    grid_points: int
    refined: bool
    bracket: tuple
    endpoint: Optional[str] = None

    def to_json(self) -> dict:
        return {"argmax_alpha": _jnum(self.argmax_alpha), "value": _jnum(self.value),
                "grid_points": self.grid_points, "refined": self.refined,
                "bracket": [_jnum(b) for b in self.bracket], "endpoint": self.endpoint}


def _jnum(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _golden_max(g, lo: float, hi: float, tol: float):
    """Maximize g on [lo, hi] by golden-section search; returns (x, g(x), (lo, hi))."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    x = (a + b) / 2
    return x, g(x), (a, b)


def _sup_over_order(objective, u_lo: float, u_hi: float, extra: Iterable[float],
                    left_limit: float, right_limit: Optional[float], right_name: str, many=None):
    """Shared sup routine.  The search variable is u = log(alpha - 1).

    ``objective(alpha)`` is the member function and ``many`` its vectorized
    form over the grid; ``left_limit`` is its value as alpha -> 1+,
    ``right_limit`` the value at the right end of the range.
    """
    us = np.linspace(u_lo, u_hi, GRID_POINTS)
    alphas = 1 + np.exp(us)
    vals = list(many(alphas)) if many is not None else [objective(a) for a in alphas]
    i = int(np.argmax(vals))
    lo_u = us[max(i - 1, 0)]
    hi_u = us[min(i + 1, len(us) - 1)]
    best_a, best_v = float(alphas[i]), vals[i]
    refined = False
    if math.isfinite(best_v):
        u_star, v_star, (a_u, b_u) = _golden_max(lambda u: objective(1 + math.exp(u)), lo_u, hi_u, BRACKET)
        refined = True
        if v_star >= best_v:
            best_a, best_v = 1 + math.exp(u_star), v_star
        bracket = (1 + math.exp(a_u), 1 + math.exp(b_u))
    else:
        bracket = (1 + math.exp(lo_u), 1 + math.exp(hi_u))
    for a in extra:
        if a > 1 and a <= 1 + math.exp(u_hi) * (1 + 1e-12):
            v = objective(a)
            if v > best_v:
                best_a, best_v = float(a), v
    endpoint = None
    if left_limit > best_v + 1e-12:
        best_a, best_v, endpoint = 1.0, left_limit, "alpha->1"
    if right_limit is not None and right_limit > best_v + 1e-12:
        best_a, best_v, endpoint = (INF if right_name == "alpha->inf" else 1 + math.exp(u_hi)), right_limit, right_name
    cert = SupCertificate(best_a, best_v, GRID_POINTS, refined, bracket, endpoint)
    return best_v, cert


def _left_limit(p: np.ndarray, q: np.ndarray, xi: float = 0.0) -> float:
    """lim_{alpha->1+} (D^alpha - xi)/alpha."""
    mass = math.fsum(p)
    if mass == 0:
        return NEG_INF
    if abs(mass - 1) <= 1e-12:
        return _kl_aligned(p, q) - xi
    return NEG_INF


def zcdp_divergence(xi: float, mu1: SubDist, mu2: SubDist, extra_alphas: Sequence[float] = ()):
    if not xi >= 0:
        raise InvalidParam("xi must be >= 0")
    p, q = _align(mu1, mu2)
    if np.any((p > 0) & (q == 0)):
        return INF, SupCertificate(INF, INF, 0, False, (1.0, INF), "support")
    if not np.any(p > 0):
        return NEG_INF, SupCertificate(INF, NEG_INF, 0, False, (1.0, INF), "null")

    lt = _LogTerms(p, q)

    def obj(a):
        return (lt.renyi(a) - xi) / a

    return _sup_over_order(obj, math.log(ALPHA_MIN_OFFSET), math.log(ALPHA_MAX - 1), extra_alphas,
                           _left_limit(p, q, xi), 0.0, "alpha->inf",
                           many=lambda al: (lt.renyi_many(al) - xi) / al)


def tcdp_divergence(omega: float, mu1: SubDist, mu2: SubDist, extra_alphas: Sequence[float] = ()):
    if not omega > 1:
        raise InvalidParam("omega must be > 1")
    p, q = _align(mu1, mu2)
    if np.any((p > 0) & (q == 0)):
        return INF, SupCertificate(INF, INF, 0, False, (1.0, omega), "support")
    if not np.any(p > 0):
        return NEG_INF, SupCertificate(omega, NEG_INF, 0, False, (1.0, omega), "null")

    lt = _LogTerms(p, q)

    def obj(a):
        return lt.renyi(a) / a

    u_hi = math.log(omega - 1)
    u_lo = min(math.log(ALPHA_MIN_OFFSET), u_hi - 1.0)
    # The right end of the grid is alpha = omega itself; D^alpha is continuous
    # in alpha, so that value is the alpha -> omega- limit.
    return _sup_over_order(obj, u_lo, u_hi, extra_alphas, _left_limit(p, q), None, "alpha->omega",
                           many=lambda al: lt.renyi_many(al) / al)


def divergence(spec, mu1: SubDist, mu2: SubDist, extra_alphas: Sequence[float] = ()):
    """Evaluate any spec; returns (value, certificate or None)."""
    if isinstance(spec, FDiv):
        return f_divergence(spec.f, mu1, mu2), None
    if isinstance(spec, DPDiv):
        return dp_divergence(spec.epsilon, mu1, mu2), None
    if isinstance(spec, RenyiDiv):
        return renyi_divergence(spec.alpha, mu1, mu2), None
    if isinstance(spec, ZCDPDiv):
        return zcdp_divergence(spec.xi, mu1, mu2, extra_alphas)
    if isinstance(spec, TCDPDiv):
        return tcdp_divergence(spec.omega, mu1, mu2, extra_alphas)
    raise InvalidParam(f"unknown divergence spec {spec!r}")


def privacy_loss(mu1: SubDist, mu2: SubDist, y) -> float:
    a, b = mu1[y], mu2[y]
    if b == 0:
        if a == 0:
            raise UndefinedLoss(f"both masses vanish at {y!r}")
        return INF
    return a / b


def partition_lower_bound(f: WeightFn, mu1: SubDist, mu2: SubDist, partition: Sequence[Iterable]) -> float:
    blocks = [frozenset(b) for b in partition]
    seen: set = set()
    for b in blocks:
        if seen & b:
            raise InvalidPartition("partition blocks overlap")
        seen |= b
    if not (set(mu1) | set(mu2)) <= seen:
        raise InvalidPartition("partition does not cover both supports")
    return ext_sum(perspective(math.fsum(mu2[x] for x in b), math.fsum(mu1[x] for x in b), f) for b in blocks)


# -- property checks --------------------------------------------------------

REFLEXIVE, DPI, ADDITIVE, COMPOSABLE, MONOTONE_ALPHA, WEAK_TRIANGLE = (
    "REFLEXIVE", "DPI", "ADDITIVE", "COMPOSABLE", "MONOTONE_ALPHA", "WEAK_TRIANGLE")

MONOTONE_GRID = (1.1, 1.5, 2.0, 4.0, 16.0, 256.0)


@dataclass
class PropertyResult:
    passed: bool
    lhs: float = 0.0
    rhs: float = 0.0
    witness: Optional[dict] = None

    def __bool__(self):
        return self.passed


def _graded(spec, other):
    """The spec at the monoid product of the two grades (DP and zCDP add)."""
    if isinstance(spec, DPDiv):
        return DPDiv(spec.epsilon + other.epsilon)
    if isinstance(spec, ZCDPDiv):
        return ZCDPDiv(spec.xi + other.xi)
    return spec


def _le(lhs: float, rhs: float, slack: float) -> bool:
    if lhs == NEG_INF or rhs == INF:
        return True
    if lhs == INF or rhs == NEG_INF:
        return False
    return lhs <= rhs + slack


def _sup_over(values):
    best = NEG_INF
    for v in values:
        best = max(best, v)
    return best


def check_property(prop: str, spec, instance: dict, slack: float = SLACK) -> PropertyResult:
    """Evaluate one divergence property on a concrete instance.

    ``instance`` keys: mu1..mu4 (SubDist), k, f, g (Kernel), beta (second
    grade spec for ADDITIVE/COMPOSABLE), alphas, p, q.  For the sup-style
    families the right-hand suprema are also evaluated at the order that
    attains the left-hand supremum, so the comparison never hinges on two
    independent numeric searches.
    """
    def div(s, a, b, extra=()):
        return divergence(s, a, b, extra)

    def arg(cert):
        return [] if cert is None or not math.isfinite(cert.argmax_alpha) or cert.argmax_alpha <= 1 else [cert.argmax_alpha]

    mu1, mu2 = instance.get("mu1"), instance.get("mu2")
    if prop == REFLEXIVE:
        lhs, _ = div(spec, mu1, mu1)
        rhs = 0.0
    elif prop == DPI:
        k = instance["k"]
        lhs, cert = div(spec, bind(mu1, k), bind(mu2, k))
        rhs, _ = div(spec, mu1, mu2, arg(cert))
    elif prop == ADDITIVE:
        spec2 = instance.get("beta", spec)
        mu3, mu4 = instance["mu3"], instance["mu4"]
        lhs, cert = div(_graded(spec, spec2), product(mu1, mu3, 0.0), product(mu2, mu4, 0.0))
        a, _ = div(spec, mu1, mu2, arg(cert))
        b, _ = div(spec2, mu3, mu4, arg(cert))
        rhs = ext_add(a, b)
    elif prop == COMPOSABLE:
        spec2 = instance.get("beta", spec)
        f, g = instance["f"], instance["g"]
        lhs, cert = div(_graded(spec, spec2), bind(mu1, f, 0.0), bind(mu2, g, 0.0))
        a, _ = div(spec, mu1, mu2, arg(cert))
        domain = sorted(f.domain | g.domain, key=repr)
        b = _sup_over(div(spec2, f(x), g(x), arg(cert))[0] for x in domain)
        rhs = ext_add(a, b)
    elif prop == MONOTONE_ALPHA:
        if not isinstance(spec, RenyiDiv):
            raise UnsupportedProperty("MONOTONE_ALPHA is stated for Renyi divergences")
        alphas = sorted(instance.get("alphas", MONOTONE_GRID))
        vals = [renyi_divergence(a, mu1, mu2) for a in alphas]
        for (a, va), (b, vb) in zip(zip(alphas, vals), zip(alphas[1:], vals[1:])):
            if not _le(va, vb, slack):
                return PropertyResult(False, va, vb, {"alpha": a, "beta": b, **instance})
        return PropertyResult(True, vals[0], vals[-1])
    elif prop == WEAK_TRIANGLE:
        if not isinstance(spec, RenyiDiv):
            raise UnsupportedProperty(f"no weak triangle law for {spec_family(spec)}")
        p, q = instance.get("p", 2.0), instance.get("q", 2.0)
        if abs(1 / p + 1 / q - 1) > 1e-12 or p <= 1 or q <= 1:
            raise InvalidParam("weak triangle needs Hoelder conjugates p, q > 1")
        a = spec.alpha
        mu3 = instance["mu3"]
        lhs = renyi_divergence(a, mu1, mu3)
        t1 = renyi_divergence(p * a, mu1, mu2)
        coef = (p * a - 1) / (p * (a - 1))
        t1 = t1 * coef if math.isfinite(t1) else t1
        t2 = renyi_divergence(q * (p * a - 1) / p, mu2, mu3)
        rhs = ext_add(t1, t2)
    else:
        raise UnsupportedProperty(f"unknown property {prop}")
    ok = _le(lhs, rhs, slack)
    return PropertyResult(ok, lhs, rhs, None if ok else dict(instance))
