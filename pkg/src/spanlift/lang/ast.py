"""Abstract syntax for pWHILE programs and tagged relational assertions.

All nodes are frozen dataclasses, so structural equality and hashing come
for free; the checker relies on both.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

# -- types ------------------------------------------------------------------


@dataclass(frozen=True)
class Prim:
    name: str  # "bool" | "int" | "real"

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class VecTy:
    elem: "Ty"
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("vector dimension must be >= 1")

    def __str__(self):
        return f"{self.elem}^{self.dim}"


Ty = Union[Prim, VecTy]
BOOL, INT, REAL = Prim("bool"), Prim("int"), Prim("real")
NUMERIC = (INT, REAL)


class Context:
    """Ordered, duplicate-free list of typed variables."""

    __slots__ = ("items", "_index")

    def __init__(self, items):
        self.items = tuple((str(n), t) for n, t in items)
        self._index = {}
        for k, (n, _) in enumerate(self.items):
            if n in self._index:
                raise ValueError(f"duplicate variable {n!r} in context")
            self._index[n] = k

    def __contains__(self, name):
        return name in self._index

    def __getitem__(self, name) -> Ty:
        return self.items[self._index[name]][1]

    def index(self, name) -> int:
        return self._index[name]

    def names(self):
        return [n for n, _ in self.items]

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __eq__(self, other):
        return isinstance(other, Context) and self.items == other.items

    def __hash__(self):
        return hash(self.items)

    def __repr__(self):
        return "Context(" + ", ".join(f"{n}: {t}" for n, t in self.items) + ")"


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    """Literal; ``ty`` disambiguates 1 (int) from 1.0 (real) and true."""

    value: object
    ty: Prim

    @staticmethod
    def of(v) -> "Lit":
        if isinstance(v, bool):
            return Lit(v, BOOL)
        if isinstance(v, int):
            return Lit(v, INT)
        return Lit(Fraction(v) if not isinstance(v, float) else Fraction(repr(v)), REAL)


@dataclass(frozen=True)
class VecLit:
    items: Tuple["Expr", ...]


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / min max && ||
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Cmp:
    op: str  # <= >= == != < >
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class UnOp:
    op: str  # - !
    arg: "Expr"


@dataclass(frozen=True)
class Index:
    arr: "Expr"
    idx: "Expr"


@dataclass(frozen=True)
class Update:
    """Functional array update arr[idx := val]; produced by substitution."""

    arr: "Expr"
    idx: "Expr"
    val: "Expr"


Expr = Union[Var, Lit, VecLit, BinOp, Cmp, UnOp, Index, Update]

ARITH_OPS = ("+", "-", "*", "/", "min", "max")
BOOL_OPS = ("&&", "||")
CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")

# -- probabilistic expressions ----------------------------------------------


@dataclass(frozen=True)
class Dirac:
    arg: Expr


@dataclass(frozen=True)
class Bern:
    p: Expr


@dataclass(frozen=True)
class Lap:
    mean: Expr
    scale: Expr


@dataclass(frozen=True)
class Gauss:
    mean: Expr
    var: Expr


@dataclass(frozen=True)
class SinhGauss:
    """center + A * arsinh(Gauss(0, var) / A)."""

    center: Expr
    A: Expr
    var: Expr


PExpr = Union[Dirac, Bern, Lap, Gauss, SinhGauss]

# -- commands ---------------------------------------------------------------


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    name: str
    index: Optional[Expr]
    expr: Expr


@dataclass(frozen=True)
class Sample:
    name: str
    index: Optional[Expr]
    dist: PExpr


@dataclass(frozen=True)
class Seq:
    """Flat sequence of at least two commands; build with :func:`seq`."""

    items: Tuple["Cmd", ...]


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Cmd"
    orelse: "Cmd"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Cmd"
    bound: Optional[int] = None


Cmd = Union[Skip, Assign, Sample, Seq, If, While]


def seq(*cmds: Cmd) -> Cmd:
    """Sequential composition, flattened so that ';' is associative."""
    flat = []
    for c in cmds:
        if isinstance(c, Seq):
            flat.extend(c.items)
        else:
            flat.append(c)
    if not flat:
        return Skip()
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def modified_vars(c: Cmd) -> frozenset:
    if isinstance(c, (Assign, Sample)):
        return frozenset([c.name])
    if isinstance(c, Seq):
        return frozenset().union(*(modified_vars(x) for x in c.items))
    if isinstance(c, If):
        return modified_vars(c.then) | modified_vars(c.orelse)
    if isinstance(c, While):
        return modified_vars(c.body)
    return frozenset()


def loops_bounded(c: Cmd) -> bool:
    if isinstance(c, While):
        return c.bound is not None and loops_bounded(c.body)
    if isinstance(c, Seq):
        return all(loops_bounded(x) for x in c.items)
    if isinstance(c, If):
        return loops_bounded(c.then) and loops_bounded(c.orelse)
    return True


def expr_vars(e) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Lit):
        return frozenset()
    if isinstance(e, VecLit):
        return frozenset().union(*(expr_vars(x) for x in e.items))
    if isinstance(e, (BinOp, Cmp)):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, UnOp):
        return expr_vars(e.arg)
    if isinstance(e, Index):
        return expr_vars(e.arr) | expr_vars(e.idx)
    if isinstance(e, Update):
        return expr_vars(e.arr) | expr_vars(e.idx) | expr_vars(e.val)
    raise TypeError(f"not an expression: {e!r}")


# -- relational assertions --------------------------------------------------


@dataclass(frozen=True)
class Tagged:
    """e<tag>: the expression read in memory 1 or 2."""

    expr: Expr
    tag: int


@dataclass(frozen=True)
class RConst:
    value: object
    ty: Prim

    @staticmethod
    def of(v) -> "RConst":
        lit = Lit.of(v)
        return RConst(lit.value, lit.ty)


@dataclass(frozen=True)
class RBin:
    op: str  # + - * / min max
    left: "RTerm"
    right: "RTerm"


RTerm = Union[Tagged, RConst, RBin]


@dataclass(frozen=True)
class Atom:
    op: str  # CMP_OPS
    left: RTerm
    right: RTerm


@dataclass(frozen=True)
class And:
    items: Tuple["Assertion", ...]


@dataclass(frozen=True)
class Or:
    items: Tuple["Assertion", ...]


@dataclass(frozen=True)
class Not:
    arg: "Assertion"


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Comp:
    """Relational composition of two assertions (transitivity pre-conditions).

    Holds of (m1, m3) when some m2 has first(m1, m2) and second(m2, m3).
    """

    first: "Assertion"
    second: "Assertion"


Assertion = Union[Atom, And, Or, Not, Top, Bot, Comp]


def conj(*items: Assertion) -> Assertion:
    flat = []
    for a in items:
        if isinstance(a, And):
            flat.extend(a.items)
        elif not isinstance(a, Top):
            flat.append(a)
    if not flat:
        return Top()
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*items: Assertion) -> Assertion:
    flat = []
    for a in items:
        if isinstance(a, Or):
            flat.extend(a.items)
        elif not isinstance(a, Bot):
            flat.append(a)
    if not flat:
        return Bot()
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


# -- hashing ----------------------------------------------------------------
#
# Assertions produced by substitution are deep trees that get hashed over and
# over (lru caches, structural comparison); caching the hash on the node makes
# that linear in the number of distinct nodes instead of the tree size.


def _cached_hash(self) -> int:
    try:
        return self.__dict__["_hash"]
    except KeyError:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
        object.__setattr__(self, "_hash", h)
        return h


for _cls in (Prim, VecTy, Var, Lit, VecLit, BinOp, Cmp, UnOp, Index, Update, Dirac, Bern, Lap, Gauss,
             SinhGauss, Skip, Assign, Sample, Seq, If, While, Tagged, RConst, RBin, Atom, And, Or, Not,
             Top, Bot, Comp):
    _cls.__hash__ = _cached_hash
