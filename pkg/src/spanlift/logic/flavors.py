"""Privacy flavors and their grading monoids.

A flavor value is both a claim (e.g. zCDP with xi, rho) and a grade in the
flavor's monoid.  Every flavor is stored as (kind, index, a, d):

========  ==========  ===========  ===========
kind      index       a            d
========  ==========  ===========  ===========
DP        --          epsilon      delta
RDP       alpha       --           rho
zCDP      --          xi           rho
tCDP      omega       --           rho
========  ==========  ===========  ===========

Composition adds ``a`` and ``d`` componentwise; the index must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..errors import FlavorMismatch, InvalidParam
from ..numerics import ext_add

KINDS = ("DP", "RDP", "zCDP", "tCDP")
REL_TOL = 1e-9
ABS_TOL = 1e-12


@dataclass(frozen=True)
class Flavor:
    kind: str
    index: Optional[float]
    a: float
    d: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParam(f"unknown flavor {self.kind!r}")
        if any(isinstance(v, float) and math.isnan(v) for v in (self.a, self.d)):
            raise InvalidParam("flavor parameters must not be NaN")
        if self.kind == "DP" and not (self.a >= 0 and self.d >= 0):
            raise InvalidParam(f"DP needs epsilon, delta >= 0, got {self.a}, {self.d}")
        if self.kind == "zCDP" and not self.a >= 0:
            raise InvalidParam(f"zCDP needs xi >= 0, got {self.a}")
        if self.kind in ("RDP", "tCDP"):
            if self.index is None or not self.index > 1:
                name = "alpha" if self.kind == "RDP" else "omega"
                raise InvalidParam(f"{self.kind} needs {name} > 1, got {self.index}")
        elif self.index is not None:
            raise InvalidParam(f"{self.kind} takes no order parameter")

    # -- named accessors --
    @property
    def epsilon(self):
        return self.a

    @property
    def delta(self):
        return self.d

    @property
    def xi(self):
        return self.a

    @property
    def rho(self):
        return self.d

    @property
    def alpha(self):
        return self.index

    @property
    def omega(self):
        return self.index

    def same_family(self, other: "Flavor") -> bool:
        return self.kind == other.kind and self.index == other.index

    def with_grade(self, a: float, d: float) -> "Flavor":
        return Flavor(self.kind, self.index, a, d)

    def to_json(self) -> dict:
        if self.kind == "DP":
            return {"kind": "DP", "epsilon": _num(self.a), "delta": _num(self.d)}
        if self.kind == "RDP":
            return {"kind": "RDP", "alpha": _num(self.index), "rho": _num(self.d)}
        if self.kind == "zCDP":
            return {"kind": "zCDP", "xi": _num(self.a), "rho": _num(self.d)}
        return {"kind": "tCDP", "omega": _num(self.index), "rho": _num(self.d)}

    @staticmethod
    def from_json(data: dict) -> "Flavor":
        try:
            kind = data["kind"]
            if kind == "DP":
                return DP(_real(data["epsilon"]), _real(data["delta"]))
            if kind == "RDP":
                return RDP(_real(data["alpha"]), _real(data["rho"]))
            if kind == "zCDP":
                return ZCDP(_real(data["xi"]), _real(data["rho"]))
            if kind == "tCDP":
                return TCDP(_real(data["omega"]), _real(data["rho"]))
        except KeyError as exc:
            raise InvalidParam(f"flavor is missing field {exc}") from exc
        raise InvalidParam(f"unknown flavor kind {data.get('kind')!r}")

    def __str__(self):
        j = self.to_json()
        return j.pop("kind") + "(" + ", ".join(f"{k}={v}" for k, v in j.items()) + ")"


def _num(v):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _real(v) -> float:
    if isinstance(v, str):
        return float(v)  # accepts "inf"
    return float(v)


def DP(epsilon, delta) -> Flavor:
    return Flavor("DP", None, float(epsilon), float(delta))


def RDP(alpha, rho) -> Flavor:
    return Flavor("RDP", float(alpha), 0.0, float(rho))


def ZCDP(xi, rho) -> Flavor:
    return Flavor("zCDP", None, float(xi), float(rho))


def TCDP(omega, rho) -> Flavor:
    return Flavor("tCDP", float(omega), 0.0, float(rho))


def unit(like: Flavor) -> Flavor:
    """The monoid unit (1_A, 0) in the family of ``like``."""
    return like.with_grade(0.0, 0.0)


def compose(x: Flavor, y: Flavor) -> Flavor:
    if not x.same_family(y):
        raise FlavorMismatch(f"cannot compose {x} with {y}")
    return x.with_grade(ext_add(x.a, y.a), ext_add(x.d, y.d))


def close(u: float, v: float) -> bool:
    if u == v:
        return True
    if math.isinf(u) or math.isinf(v):
        return False
    return abs(u - v) <= max(ABS_TOL, REL_TOL * max(abs(u), abs(v)))


def grades_close(x: Flavor, y: Flavor) -> bool:
    return x.same_family(y) and close(x.a, y.a) and close(x.d, y.d)


def leq(x: Flavor, y: Flavor) -> bool:
    """Componentwise grade order (with the comparison tolerance)."""
    return x.same_family(y) and (x.a <= y.a or close(x.a, y.a)) and (x.d <= y.d or close(x.d, y.d))
