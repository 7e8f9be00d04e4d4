"""Finite-support subprobability distributions and the sub-Giry monad.

Outcomes are hashable Python values: ``bool``, ``int``, ``Fraction`` (real
values, always exact so that supports align), and tuples of outcomes.  An
outcome space should be homogeneous in type, since Python identifies
``True``, ``1`` and ``Fraction(1)`` as dictionary keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Union

import numpy as np
from scipy import special

from .errors import DomainMismatch, InvalidGrid, InvalidParam, ShapeError

Outcome = Hashable

# Masses at or below this after arithmetic are dropped and counted as dust.
DUST = 1e-15


class SubDist(Mapping):
    """Immutable finite map outcome -> positive mass, total mass <= 1.

    ``dust`` records mass that was dropped on the way here (pruned entries,
    discretization tails); it is informational and ignored by equality.
    """

    __slots__ = ("_m", "dust")

    def __init__(self, masses: Optional[Mapping] = None, dust: float = 0.0, prune: float = 0.0):
        m = {}
        for x, w in (masses or {}).items():
            w = float(w)
            if w > prune:
                m[x] = w
            elif w > 0:
                dust += w
            elif w < 0:
                raise InvalidParam(f"negative mass {w} at {x!r}")
        total = math.fsum(m.values())
        if total > 1 + 1e-12:
            raise InvalidParam(f"total mass {total} exceeds 1")
        self._m = m
        self.dust = dust

    def __getitem__(self, x):
        return self._m.get(x, 0.0)

    def __iter__(self) -> Iterator:
        return iter(self._m)

    def __len__(self) -> int:
        return len(self._m)

    def __contains__(self, x) -> bool:
        return x in self._m

    def __eq__(self, other) -> bool:
        if isinstance(other, SubDist):
            return self._m == other._m
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._m.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{x!r}: {w:.6g}" for x, w in list(self._m.items())[:8])
        more = ", ..." if len(self._m) > 8 else ""
        return f"SubDist({{{body}{more}}})"

    @property
    def support(self) -> frozenset:
        return frozenset(self._m)

    def mass(self) -> float:
        return math.fsum(self._m.values())

    def isclose(self, other: "SubDist", tol: float = 1e-12) -> bool:
        keys = set(self._m) | set(other._m)
        return all(abs(self[x] - other[x]) <= tol for x in keys)

    def scale(self, c: float) -> "SubDist":
        return SubDist({x: c * w for x, w in self._m.items()}, self.dust * c)

    def restrict(self, pred: Callable[[Outcome], bool]) -> "SubDist":
        return SubDist({x: w for x, w in self._m.items() if pred(x)})

    def to_json(self) -> dict:
        return {"support": [{"outcome": outcome_to_json(x), "mass": w} for x, w in self._m.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "SubDist":
        try:
            entries = data["support"]
        except (KeyError, TypeError):
            raise ShapeError("distribution JSON needs a 'support' list")
        m: dict = {}
        for e in entries:
            x = outcome_from_json(e["outcome"])
            m[x] = m.get(x, 0.0) + float(e["mass"])
        return cls(m)


def outcome_to_json(x):
    if isinstance(x, bool):
        return {"bool": x}
    if isinstance(x, int):
        return {"int": x}
    if isinstance(x, Fraction):
        return {"real": str(x)}
    if isinstance(x, float):
        return {"real": str(Fraction(x))}
    if isinstance(x, tuple):
        return {"tuple": [outcome_to_json(v) for v in x]}
    if isinstance(x, str):
        return {"atom": x}
    raise ShapeError(f"cannot serialize outcome {x!r}")


def outcome_from_json(d):
    if not isinstance(d, dict) or len(d) != 1:
        raise ShapeError(f"bad outcome encoding {d!r}")
    (tag, v), = d.items()
    if tag == "bool":
        return bool(v)
    if tag == "int":
        return int(v)
    if tag == "real":
        return Fraction(str(v))
    if tag == "tuple":
        return tuple(outcome_from_json(e) for e in v)
    if tag == "atom":
        return str(v)
    raise ShapeError(f"unknown outcome tag {tag!r}")


class Kernel:
    """Finite kernel X -> SubDist(Y), total on its declared domain."""

    def __init__(self, table: Mapping, domain: Optional[Iterable] = None):
        self.table = dict(table)
        self.domain = frozenset(self.table if domain is None else domain)
        missing = [x for x in self.domain if x not in self.table]
        if missing:
            raise DomainMismatch(f"kernel undefined on {missing[:3]!r}")

    @classmethod
    def from_fn(cls, fn: Callable[[Outcome], SubDist], domain: Iterable) -> "Kernel":
        return cls({x: fn(x) for x in domain})

    def __call__(self, x) -> SubDist:
        try:
            return self.table[x]
        except KeyError:
            raise DomainMismatch(f"kernel undefined at {x!r}") from None

    def __repr__(self):
        return f"Kernel(|domain|={len(self.domain)})"


KernelLike = Union[Kernel, Callable[[Outcome], SubDist]]


def dirac(x: Outcome) -> SubDist:
    return SubDist({x: 1.0})


def null() -> SubDist:
    return SubDist()


def bind(mu: SubDist, k: KernelLike, prune: float = DUST) -> SubDist:
    acc: dict = {}
    dust = mu.dust
    for x, w in mu.items():
        kx = k(x)
        dust += w * kx.dust
        for y, v in kx.items():
            acc[y] = acc.get(y, 0.0) + w * v
    return SubDist(acc, dust, prune)


def pushforward(mu: SubDist, h: Callable[[Outcome], Outcome]) -> SubDist:
    acc: dict = {}
    for x, w in mu.items():
        y = h(x)
        acc[y] = acc.get(y, 0.0) + w
    return SubDist(acc, mu.dust)


def product(mu1: SubDist, mu2: SubDist, prune: float = DUST) -> SubDist:
    acc = {(x, y): w * v for x, w in mu1.items() for y, v in mu2.items()}
    return SubDist(acc, 0.0, prune)


def marginal(mu: SubDist, side: int) -> SubDist:
    if side not in (1, 2):
        raise InvalidParam("side must be 1 or 2")
    for x in mu:
        if not (isinstance(x, tuple) and len(x) == 2):
            raise ShapeError(f"outcome {x!r} is not a pair")
    return pushforward(mu, lambda xy: xy[side - 1])


def adaptive_compose(f: Kernel, g: KernelLike) -> Kernel:
    """(f |> g)(x) = law of (y, z) with y ~ f(x), z ~ g((y, x))."""

    def run(x):
        fx = f(x)
        return bind(fx, lambda y: pushforward(g((y, x)), lambda z: (y, z)))

    return Kernel({x: run(x) for x in f.domain})


# -- discretization ---------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise InvalidParam("Gaussian variance must be > 0")


@dataclass(frozen=True)
class Laplace:
    mean: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidParam("Laplace scale must be > 0")


@dataclass(frozen=True)
class SinhNormal:
    """Law of center + A * arsinh(G / A) with G ~ N(0, var)."""

    center: float
    A: float
    var: float

    def __post_init__(self):
        if not (self.A > 0 and self.var > 0):
            raise InvalidParam("SinhNormal needs A > 0 and var > 0")


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise InvalidParam("Bernoulli p must lie in [0, 1]")


@dataclass(frozen=True)
class PointMass:
    value: Outcome


DensityModel = Union[Gaussian, Laplace, SinhNormal, Bernoulli, PointMass]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(str(v))


class GridSpec:
    """Uniform grid of ``bins`` cells on [center - halfwidth, center + halfwidth].

    Bin centers are exact rationals and serve directly as real outcomes.
    """

    __slots__ = ("center", "halfwidth", "bins", "_centers")

    def __init__(self, center, halfwidth, bins: int):
        self.center = _frac(center)
        self.halfwidth = _frac(halfwidth)
        self.bins = int(bins)
        if self.bins < 2 or self.halfwidth <= 0:
            raise InvalidGrid(f"grid needs >= 2 bins and positive extent, got {self!r}")
        self._centers = None

    def __repr__(self):
        return f"GridSpec({float(self.center)}, {float(self.halfwidth)}, {self.bins})"

    def __eq__(self, other):
        return isinstance(other, GridSpec) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def key(self):
        return (self.center, self.halfwidth, self.bins)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        try:
            c, h, b = (s.strip() for s in text.split(","))
            return cls(Fraction(c), Fraction(h), int(b))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidGrid(f"cannot parse grid {text!r}: {exc}")

    @property
    def pitch(self) -> Fraction:
        return 2 * self.halfwidth / self.bins

    @property
    def lo(self) -> Fraction:
        return self.center - self.halfwidth

    def edges(self) -> np.ndarray:
        # Offsets are antisymmetric in j, so a grid centered at 0 is exactly
        # symmetric in floating point as well.
        steps = 2 * np.arange(self.bins + 1) - self.bins
        return float(self.center) + steps * (float(self.halfwidth) / self.bins)

    def centers(self) -> list:
        if self._centers is None:
            c, h, b = self.center, self.halfwidth, self.bins
            den = c.denominator * h.denominator * b
            base = c.numerator * h.denominator * b
            step = h.numerator * c.denominator
            self._centers = [Fraction(base + (2 * j + 1 - b) * step, den) for j in range(b)]
        return self._centers

    def snap(self, v) -> Fraction:
        j = math.floor((_frac(v) - self.lo) / self.pitch)
        return self.centers()[min(max(j, 0), self.bins - 1)]


def _bin_masses(cdf, sf, edges: np.ndarray, mid: float):
    """Per-bin masses plus the two tails; left of ``mid`` uses the cdf and
    right of it the survival function so both tails keep full precision."""
    with np.errstate(over="ignore", invalid="ignore"):
        c, s = cdf(edges), sf(edges)
    left = c[1:] - c[:-1]
    right = s[:-1] - s[1:]
    centers = 0.5 * (edges[1:] + edges[:-1])
    masses = np.where(centers < mid, left, right)
    masses = np.clip(masses, 0.0, None)
    tail = float(c[0] + s[-1])
    return masses, tail


def discretize_density(model: DensityModel, grid: Optional[GridSpec]) -> SubDist:
    if isinstance(model, Bernoulli):
        return SubDist({True: model.p, False: 1 - model.p})
    if isinstance(model, PointMass):
        v = model.value
        if grid is not None and isinstance(v, (int, float, Fraction)) and not isinstance(v, bool):
            v = grid.snap(v)
        return dirac(v)
    if not isinstance(grid, GridSpec):
        raise InvalidGrid("continuous models need a GridSpec")
    edges = grid.edges()
    if isinstance(model, Gaussian):
        sd = math.sqrt(model.var)
        mu = float(model.mean)
        masses, tail = _bin_masses(lambda x: special.ndtr((x - mu) / sd),
                                   lambda x: special.ndtr((mu - x) / sd), edges, mu)
    elif isinstance(model, Laplace):
        mu, lam = float(model.mean), float(model.scale)

        def lap_cdf(x):
            z = (x - mu) / lam
            return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1 - 0.5 * np.exp(-np.maximum(z, 0)))

        masses, tail = _bin_masses(lap_cdf, lambda x: lap_cdf(2 * mu - x), edges, mu)
    elif isinstance(model, SinhNormal):
        e, A, sd = float(model.center), float(model.A), math.sqrt(model.var)

        def warp(x):
            return A * np.sinh((x - e) / A) / sd

        masses, tail = _bin_masses(lambda x: special.ndtr(warp(x)),
                                   lambda x: special.ndtr(-warp(x)), edges, e)
    else:
        raise InvalidParam(f"unknown density model {model!r}")
    centers = grid.centers()
    return SubDist({centers[j]: w for j, w in enumerate(masses.tolist()) if w > 0}, dust=tail)
