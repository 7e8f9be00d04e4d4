"""Operations on relational assertions: substitution and evaluation."""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Tuple

from ..errors import TypeCheckError
from .ast import (And, Atom, BinOp, Bot, Cmp, Comp, Context, Index, Lit, Not, Or, RBin, RConst,
                  Tagged, Top, UnOp, Update, Var, VecLit)
from .typecheck import type_of

Subst = Dict[Tuple[str, int], object]


def subst_expr(e, mapping: Dict[str, object]):
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Lit):
        return e
    if isinstance(e, VecLit):
        return VecLit(tuple(subst_expr(x, mapping) for x in e.items))
    if isinstance(e, BinOp):
        return BinOp(e.op, subst_expr(e.left, mapping), subst_expr(e.right, mapping))
    if isinstance(e, Cmp):
        return Cmp(e.op, subst_expr(e.left, mapping), subst_expr(e.right, mapping))
    if isinstance(e, UnOp):
        return UnOp(e.op, subst_expr(e.arg, mapping))
    if isinstance(e, Index):
        return Index(subst_expr(e.arr, mapping), subst_expr(e.idx, mapping))
    if isinstance(e, Update):
        return Update(subst_expr(e.arr, mapping), subst_expr(e.idx, mapping), subst_expr(e.val, mapping))
    raise TypeError(f"not an expression: {e!r}")


def _subst_term(t, per_tag):
    if isinstance(t, Tagged):
        m = per_tag.get(t.tag)
        return Tagged(subst_expr(t.expr, m), t.tag) if m else t
    if isinstance(t, RBin):
        return RBin(t.op, _subst_term(t.left, per_tag), _subst_term(t.right, per_tag))
    return t


def _subst(phi, per_tag):
    if isinstance(phi, Atom):
        return Atom(phi.op, _subst_term(phi.left, per_tag), _subst_term(phi.right, per_tag))
    if isinstance(phi, And):
        return And(tuple(_subst(x, per_tag) for x in phi.items))
    if isinstance(phi, Or):
        return Or(tuple(_subst(x, per_tag) for x in phi.items))
    if isinstance(phi, Not):
        return Not(_subst(phi.arg, per_tag))
    if isinstance(phi, (Top, Bot)):
        return phi
    if isinstance(phi, Comp):
        # Both components talk about an intermediate memory; substitution
        # through a composition is not meaningful.
        raise TypeCheckError("cannot substitute into a relational composition")
    raise TypeError(f"not an assertion: {phi!r}")


def substitute(phi, subst: Subst, ctx: Context | None = None):
    """Simultaneous substitution of tagged variables.

    ``subst`` maps (name, tag) to an expression read in the same memory.
    With a context, each replacement must have the variable's type.
    """
    return _substitute(phi, tuple(sorted(subst.items(), key=lambda kv: kv[0])), ctx)


@lru_cache(maxsize=16384)
def _substitute(phi, items, ctx):
    per_tag: Dict[int, Dict[str, object]] = {}
    for (name, tag), e in items:
        if tag not in (1, 2):
            raise TypeCheckError(f"bad tag {tag}", code="BAD_TAG")
        if ctx is not None:
            if name not in ctx:
                raise TypeCheckError(f"unbound variable {name!r}", code="UNBOUND_VARIABLE")
            if type_of(e, ctx) != ctx[name]:
                raise TypeCheckError(f"substituting {type_of(e, ctx)} for {name}: {ctx[name]}")
        per_tag.setdefault(tag, {})[name] = e
    return _subst(phi, per_tag)


def assign_subst(name: str, index, expr, tag: int) -> Subst:
    """The substitution that models ``name[index] <- expr`` (or ``name <- expr``)."""
    if index is None:
        return {(name, tag): expr}
    return {(name, tag): Update(Var(name), index, expr)}


# -- evaluation ------------------------------------------------------------------


def _eval_term(t, m1, m2, ctx):
    from ..interp import _ARITH, eval_expr

    if isinstance(t, Tagged):
        return eval_expr(t.expr, m1 if t.tag == 1 else m2, ctx)
    if isinstance(t, RConst):
        return t.value
    if isinstance(t, RBin):
        return _ARITH[t.op](_eval_term(t.left, m1, m2, ctx), _eval_term(t.right, m1, m2, ctx))
    raise TypeError(f"not a relational term: {t!r}")


def eval_assertion(phi, m1: tuple, m2: tuple, ctx: Context) -> bool:
    """Truth of phi on the memory pair (m1, m2)."""
    from ..interp import _CMP

    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Atom):
        return _CMP[phi.op](_eval_term(phi.left, m1, m2, ctx), _eval_term(phi.right, m1, m2, ctx))
    if isinstance(phi, And):
        return all(eval_assertion(x, m1, m2, ctx) for x in phi.items)
    if isinstance(phi, Or):
        return any(eval_assertion(x, m1, m2, ctx) for x in phi.items)
    if isinstance(phi, Not):
        return not eval_assertion(phi.arg, m1, m2, ctx)
    if isinstance(phi, Comp):
        raise TypeCheckError("a relational composition cannot be evaluated on one memory pair")
    raise TypeError(f"not an assertion: {phi!r}")
