"""Budget arithmetic detached from programs.

Composition, group privacy, the five conversions between flavors, the
advanced-composition baseline and the FoldG route comparison.  Everything is
in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

from .errors import FlavorMismatch, InvalidParam, UnsupportedDirection, UnsupportedFlavor
from .logic.flavors import DP, RDP, TCDP, ZCDP, Flavor
from .logic.flavors import compose as _compose_flavors
from .logic.flavors import unit
from .logic.rules import (dp_gauss_min_c, group_coefficient, rdp_to_dp, tcdp_to_dp,
                          zcdp_to_dp)

PrivacyBudget = Flavor


@dataclass(frozen=True)
class RdpCurve:
    """A budget valid at every order alpha > 1: alpha -> RDP(alpha, rho(alpha)).

    Used for the output of the zCDP-to-RDP conversion, whose conclusion holds
    for all orders at once.
    """

    rho_of: Callable[[float], float]
    label: str = ""

    def __call__(self, alpha: float) -> Flavor:
        if not alpha > 1:
            raise InvalidParam(f"RDP order must be > 1, got {alpha}")
        return RDP(alpha, self.rho_of(alpha))

    @staticmethod
    def constant(rho: float, label: str = "") -> "RdpCurve":
        return RdpCurve(lambda _a, rho=rho: rho, label or f"rho={rho}")

    @staticmethod
    def gaussian(r: float, sigma2: float) -> "RdpCurve":
        """Gaussian mechanism with sensitivity r: rho(alpha) = alpha r^2 / (2 sigma^2)."""
        return RdpCurve(lambda a: a * r * r / (2 * sigma2), f"gauss(r={r}, sigma2={sigma2})")


def compose(a: PrivacyBudget, b: PrivacyBudget) -> PrivacyBudget:
    """Sequential composition; raises FlavorMismatch across families or indices."""
    return _compose_flavors(a, b)


def compose_all(steps: Sequence[PrivacyBudget]) -> PrivacyBudget:
    if not steps:
        raise InvalidParam("nothing to compose")
    acc = unit(steps[0])
    for s in steps:
        acc = compose(acc, s)
    return acc


# -- conversions ---------------------------------------------------------------------------


def _check_delta(delta) -> float:
    if delta is None:
        raise InvalidParam("this conversion needs delta")
    d = float(delta)
    if not 0 < d < 1:
        raise InvalidParam(f"delta must lie in (0, 1), got {d}")
    return d


def _need_lossless(lossless: bool, route: str, assumptions: Optional[list]):
    if not lossless:
        raise InvalidParam(f"{route} is only sound for lossless programs (pass lossless=True)")
    if assumptions is not None:
        assumptions.append({"kind": "lossless", "route": route})


def convert(b: PrivacyBudget, target: str, delta: Optional[float] = None, alpha: Optional[float] = None,
            lossless: bool = True, assumptions: Optional[list] = None) -> Union[Flavor, RdpCurve]:
    """Convert a budget to another flavor.

    Directions: DP(eps, 0) <-> zCDP(eps, 0); zCDP(0, rho) -> RDP (an RdpCurve
    unless ``alpha`` is given); zCDP, tCDP and RDP -> DP at ``delta``.  All
    but zCDP -> RDP need lossless programs; that is the caller's claim and
    is appended to ``assumptions`` when a list is passed.
    """
    src = b.kind
    if src == target:
        return b
    if src == "DP" and target == "zCDP":
        if b.delta != 0:
            raise InvalidParam("only pure (eps, 0)-DP converts to zCDP")
        _need_lossless(lossless, "DP->zCDP", assumptions)
        return ZCDP(b.epsilon, 0)
    if src == "zCDP" and target == "DP":
        if b.rho == 0 and delta is None:
            _need_lossless(lossless, "zCDP->DP (pure)", assumptions)
            return DP(b.xi, 0)
        d = _check_delta(delta)
        _need_lossless(lossless, "zCDP->DP", assumptions)
        return DP(zcdp_to_dp(b.xi, b.rho, d), d)
    if src == "zCDP" and target == "RDP":
        if b.xi != 0:
            raise InvalidParam("only (0, rho)-zCDP converts to RDP")
        curve = RdpCurve.constant(b.rho)
        return curve if alpha is None else curve(float(alpha))
    if src == "tCDP" and target == "DP":
        d = _check_delta(delta)
        _need_lossless(lossless, "tCDP->DP", assumptions)
        return DP(tcdp_to_dp(b.omega, b.rho, d), d)
    if src == "RDP" and target == "DP":
        d = _check_delta(delta)
        _need_lossless(lossless, "RDP->DP", assumptions)
        return DP(rdp_to_dp(b.alpha, b.rho, d), d)
    raise UnsupportedDirection(f"no conversion from {src} to {target}")


# -- group privacy ---------------------------------------------------------------------------


def _dp_trans(a: Flavor, b: Flavor) -> Flavor:
    e1, d1, e2, d2 = a.epsilon, a.delta, b.epsilon, b.delta
    return DP(e1 + e2, max(math.exp(e2) * d1 + d2, math.exp(e1) * d2 + d1))


def rdp_group(curve: Callable[[float], float], k: int, alpha: float, p: float = 2.0) -> float:
    """Group-privacy rho at order alpha for distance k, from a per-step RDP curve.

    Unrolls the weak-triangle transitivity: distance k-1 at order p*alpha is
    chained with one step at order q(p*alpha - 1)/p, where 1/p + 1/q = 1.
    """
    if k < 1:
        raise InvalidParam("k must be >= 1")
    if not p > 1 or not alpha > 1:
        raise InvalidParam("need p > 1 and alpha > 1")
    if k == 1:
        return curve(alpha)
    q = p / (p - 1)
    far = rdp_group(curve, k - 1, p * alpha, p)
    near = curve(q * (p * alpha - 1) / p)
    return (p * alpha - 1) * far / (p * (alpha - 1)) + near


def group_privacy(b: Union[PrivacyBudget, RdpCurve], k: int, p: float = 2.0,
                  alpha: Optional[float] = None, notes: Optional[list] = None) -> PrivacyBudget:
    """Budget for inputs at distance k, by iterating the flavor's transitivity law.

    RDP needs the per-step budget at several orders, so pass an RdpCurve (and
    the order ``alpha`` of interest); a lone RDP point is rejected.  The zCDP
    coefficient is experimental and noted in ``notes``.
    """
    if not isinstance(k, int) or k < 2:
        raise InvalidParam(f"group privacy needs an integer k >= 2, got {k!r}")
    if isinstance(b, RdpCurve):
        if alpha is None:
            raise InvalidParam("RDP group privacy needs the order alpha")
        return RDP(alpha, rdp_group(lambda a: b(a).rho, k, float(alpha), p))
    if b.kind == "tCDP":
        raise UnsupportedFlavor("no transitivity law is known for tCDP")
    if b.kind == "DP":
        acc = b
        for _ in range(k - 1):
            acc = _dp_trans(acc, b)
        return acc
    if b.kind == "zCDP":
        if notes is not None:
            notes.append({"experimental": "zCDP group coefficient xi*k(k+1)/2"})
        return ZCDP(group_coefficient(k, b.xi), k * k * b.rho)
    raise InvalidParam("RDP group privacy needs an RdpCurve, not a single order")


# -- advanced composition and FoldG -----------------------------------------------------------


def advanced_composition(epsilon: float, delta1: float, K: int, delta2: float) -> PrivacyBudget:
    """K-fold (eps, delta1)-DP as (eps sqrt(2K ln(1/delta2)) + K eps^2, K delta1 + delta2)."""
    if not epsilon > 0:
        raise InvalidParam(f"epsilon must be > 0, got {epsilon}")
    if not (0 < delta1 < 0.5 and 0 < delta2 < 0.5):
        raise InvalidParam(f"need 0 < delta1, delta2 < 1/2, got {delta1}, {delta2}")
    if not isinstance(K, int) or K < 1:
        raise InvalidParam(f"K must be a positive integer, got {K!r}")
    eps = epsilon * math.sqrt(2 * K * math.log(1 / delta2)) + K * epsilon ** 2
    return DP(eps, K * delta1 + delta2)


def gauss_dp_epsilon(sigma: float, delta: float, r: float = 1.0) -> float:
    """Smallest epsilon the Gaussian DP rule admits at this sigma and delta."""
    return dp_gauss_min_c(delta) * r / sigma


def report(route: str, budget: Flavor, intermediate=None) -> dict:
    return {"route": route, "epsilon": budget.epsilon, "delta": budget.delta,
            "intermediate": intermediate if intermediate is not None else {}}


def compare_foldg(K: int, sigma: float, delta1: float, delta2: float) -> dict:
    """Compare the zCDP route with advanced composition for K Gaussian queries.

    The headline zCDP epsilon is taken at delta2, the value the worked
    example quotes; the value at the matched total delta K*delta1 + delta2 is
    reported as well.  The strict inequality is checked only for K > 1.
    """
    if not isinstance(K, int) or K < 1:
        raise InvalidParam(f"K must be a positive integer, got {K!r}")
    if not sigma > 0:
        raise InvalidParam(f"sigma must be > 0, got {sigma}")
    if not 0 < delta2 < 0.4:
        raise InvalidParam(f"the comparison needs 0 < delta2 < 0.4, got {delta2}")
    if not 0 < delta1 < 0.5:
        raise InvalidParam(f"delta1 must lie in (0, 1/2), got {delta1}")
    delta = K * delta1 + delta2
    if not delta < 1:
        raise InvalidParam(f"K*delta1 + delta2 = {delta} must be < 1")
    rho = K / (2 * sigma ** 2)
    composed = compose_all([ZCDP(0, 1 / (2 * sigma ** 2))] * K)
    at_d2 = convert(composed, "DP", delta=delta2)
    matched = convert(composed, "DP", delta=delta)
    step = gauss_dp_epsilon(sigma, delta1)
    adv = advanced_composition(step, delta1, K, delta2)
    checked = K > 1
    better = at_d2.epsilon < adv.epsilon and matched.epsilon < adv.epsilon
    return {
        "K": K, "sigma": sigma, "delta1": delta1, "delta2": delta2,
        "zcdp": report("zCDP->DP", at_d2, {"composed": composed.to_json(), "rho": rho}),
        "zcdp_matched": report("zCDP->DP", matched, {"composed": composed.to_json(), "rho": rho}),
        "advanced": report("DP-G+advanced", adv, {"per_step_epsilon": step, "per_step_delta": delta1}),
        "inequality_checked": checked,
        "zcdp_better": better,
    }


# -- plans --------------------------------------------------------------------------------------


STRATEGIES = ("NAIVE_DP", "ADVANCED_DP", "ZCDP_THEN_CONVERT", "RDP_THEN_CONVERT")


@dataclass
class CompositionPlan:
    steps: List[PrivacyBudget]
    strategy: str = "NAIVE_DP"
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidParam(f"unknown strategy {self.strategy!r}")
        if not self.steps:
            raise InvalidParam("a plan needs at least one step")
        want = {"NAIVE_DP": "DP", "ADVANCED_DP": "DP", "ZCDP_THEN_CONVERT": "zCDP",
                "RDP_THEN_CONVERT": "RDP"}[self.strategy]
        for s in self.steps:
            if s.kind != want:
                raise FlavorMismatch(f"{self.strategy} composes {want} steps, got {s.kind}")

    def evaluate(self) -> dict:
        if self.strategy == "NAIVE_DP":
            return report("naive", compose_all(self.steps), {"steps": len(self.steps)})
        if self.strategy == "ADVANCED_DP":
            first = self.steps[0]
            if any(s != first for s in self.steps):
                raise InvalidParam("advanced composition needs identical steps")
            out = advanced_composition(first.epsilon, first.delta, len(self.steps), self.params["delta"])
            return report("advanced", out, {"steps": len(self.steps)})
        composed = compose_all(self.steps)
        out = convert(composed, "DP", delta=self.params["delta"])
        return report(f"{composed.kind}->DP", out, {"composed": composed.to_json()})


__all__ = ["PrivacyBudget", "RdpCurve", "compose", "compose_all", "convert", "group_privacy",
           "rdp_group", "advanced_composition", "gauss_dp_epsilon", "compare_foldg", "report",
           "CompositionPlan", "STRATEGIES", "DP", "RDP", "ZCDP", "TCDP"]
