"""Typing for expressions (t), distributions (p), commands (c) and assertions (R)."""

from __future__ import annotations

from typing import List

from ..errors import TypeCheckError
from .ast import (BOOL, INT, NUMERIC, REAL, And, Assign, Atom, Bern, BinOp, Bot, Cmp, Comp,
                  Context, Dirac, Gauss, If, Index, Lap, Lit, Not, Or, RBin, RConst, Sample,
                  Seq, SinhGauss, Skip, Tagged, Top, UnOp, Update, Var, VecLit, VecTy, While)


def _fail(judgment: str, msg: str, code: str = "TYPE_MISMATCH"):
    raise TypeCheckError(f"[{judgment}] {msg}", code=code, judgment=judgment)


def type_of(e, ctx: Context, warnings: List[str] | None = None):
    """Type of an expression; appends division warnings to ``warnings``."""
    if isinstance(e, Var):
        if e.name not in ctx:
            _fail("t", f"unbound variable {e.name!r}", "UNBOUND_VARIABLE")
        return ctx[e.name]
    if isinstance(e, Lit):
        return e.ty
    if isinstance(e, VecLit):
        tys = [type_of(x, ctx, warnings) for x in e.items]
        if any(t != tys[0] for t in tys):
            _fail("t", f"vector literal mixes types {', '.join(map(str, tys))}")
        return VecTy(tys[0], len(tys))
    if isinstance(e, BinOp):
        lt, rt = type_of(e.left, ctx, warnings), type_of(e.right, ctx, warnings)
        if e.op in ("&&", "||"):
            if lt != BOOL or rt != BOOL:
                _fail("t", f"'{e.op}' needs bool operands, got {lt} and {rt}")
            return BOOL
        if lt != rt or lt not in NUMERIC:
            _fail("t", f"'{e.op}' needs matching numeric operands, got {lt} and {rt}")
        if e.op == "/" and warnings is not None:
            if not isinstance(e.right, Lit):
                warnings.append("division by a non-literal divisor; x/0 evaluates to 0")
            elif e.right.value == 0:
                warnings.append("division by literal zero evaluates to 0")
        return lt
    if isinstance(e, Cmp):
        lt, rt = type_of(e.left, ctx, warnings), type_of(e.right, ctx, warnings)
        if lt != rt:
            _fail("t", f"'{e.op}' compares {lt} with {rt}")
        if e.op not in ("==", "!=") and lt not in NUMERIC:
            _fail("t", f"'{e.op}' needs numeric operands, got {lt}")
        return BOOL
    if isinstance(e, UnOp):
        t = type_of(e.arg, ctx, warnings)
        if e.op == "!" and t != BOOL:
            _fail("t", f"'!' needs bool, got {t}")
        if e.op == "-" and t not in NUMERIC:
            _fail("t", f"unary '-' needs a number, got {t}")
        return t
    if isinstance(e, Index):
        at, it = type_of(e.arr, ctx, warnings), type_of(e.idx, ctx, warnings)
        if not isinstance(at, VecTy):
            _fail("t", f"indexing a non-vector of type {at}")
        if it != INT:
            _fail("t", f"index must be int, got {it}")
        return at.elem
    if isinstance(e, Update):
        at = type_of(e.arr, ctx, warnings)
        if not isinstance(at, VecTy):
            _fail("t", f"updating a non-vector of type {at}")
        if type_of(e.idx, ctx, warnings) != INT:
            _fail("t", "update index must be int")
        vt = type_of(e.val, ctx, warnings)
        if vt != at.elem:
            _fail("t", f"update stores {vt} into {at}")
        return at
    raise TypeError(f"not an expression: {e!r}")


def type_of_pexpr(d, ctx: Context, warnings=None):
    def need(e, ty, what):
        t = type_of(e, ctx, warnings)
        if t != ty:
            _fail("p", f"{what} must be {ty}, got {t}")

    if isinstance(d, Dirac):
        return type_of(d.arg, ctx, warnings)
    if isinstance(d, Bern):
        need(d.p, REAL, "Bern parameter")
        return BOOL
    if isinstance(d, Lap):
        need(d.mean, REAL, "Lap mean")
        need(d.scale, REAL, "Lap scale")
        return REAL
    if isinstance(d, Gauss):
        need(d.mean, REAL, "Gauss mean")
        need(d.var, REAL, "Gauss variance")
        return REAL
    if isinstance(d, SinhGauss):
        need(d.center, REAL, "SinhGauss center")
        need(d.A, REAL, "SinhGauss magnitude")
        need(d.var, REAL, "SinhGauss variance")
        return REAL
    raise TypeError(f"not a distribution: {d!r}")


def _target_type(name, index, ctx, warnings):
    if name not in ctx:
        _fail("c", f"assignment to unbound variable {name!r}", "UNBOUND_VARIABLE")
    t = ctx[name]
    if index is None:
        return t
    if not isinstance(t, VecTy):
        _fail("c", f"indexed assignment to non-vector {name!r}")
    if type_of(index, ctx, warnings) != INT:
        _fail("c", "assignment index must be int")
    return t.elem


def typecheck(c, ctx: Context) -> List[str]:
    """Check a command; returns warnings, raises TypeCheckError on failure."""
    warnings: List[str] = []
    _check_cmd(c, ctx, warnings)
    return warnings


def _check_cmd(c, ctx, warnings):
    if isinstance(c, Skip):
        return
    if isinstance(c, Assign):
        tt = _target_type(c.name, c.index, ctx, warnings)
        et = type_of(c.expr, ctx, warnings)
        if tt != et:
            _fail("c", f"{c.name} has type {tt} but is assigned {et}")
        return
    if isinstance(c, Sample):
        tt = _target_type(c.name, c.index, ctx, warnings)
        dt = type_of_pexpr(c.dist, ctx, warnings)
        if tt != dt:
            _fail("c", f"{c.name} has type {tt} but samples {dt}")
        return
    if isinstance(c, Seq):
        for x in c.items:
            _check_cmd(x, ctx, warnings)
        return
    if isinstance(c, (If, While)):
        g = type_of(c.cond, ctx, warnings)
        if g != BOOL:
            _fail("c", f"guard has type {g}, expected bool", "GUARD_NOT_BOOL")
        if isinstance(c, If):
            _check_cmd(c.then, ctx, warnings)
            _check_cmd(c.orelse, ctx, warnings)
        else:
            _check_cmd(c.body, ctx, warnings)
        return
    raise TypeError(f"not a command: {c!r}")


def rterm_type(t, ctx: Context):
    if isinstance(t, Tagged):
        if t.tag not in (1, 2):
            _fail("R", f"tag must be 1 or 2, got {t.tag}", "BAD_TAG")
        return type_of(t.expr, ctx)
    if isinstance(t, RConst):
        return t.ty
    if isinstance(t, RBin):
        lt, rt = rterm_type(t.left, ctx), rterm_type(t.right, ctx)
        if lt != rt or lt not in NUMERIC:
            _fail("R", f"'{t.op}' needs matching numeric operands, got {lt} and {rt}")
        return lt
    raise TypeError(f"not a relational term: {t!r}")


def check_assertion(phi, ctx: Context) -> None:
    if isinstance(phi, (Top, Bot)):
        return
    if isinstance(phi, Atom):
        lt, rt = rterm_type(phi.left, ctx), rterm_type(phi.right, ctx)
        if lt != rt:
            _fail("R", f"'{phi.op}' relates {lt} with {rt}")
        if phi.op not in ("==", "!=") and lt not in NUMERIC:
            _fail("R", f"'{phi.op}' needs numeric operands, got {lt}")
        return
    if isinstance(phi, (And, Or)):
        for x in phi.items:
            check_assertion(x, ctx)
        return
    if isinstance(phi, Not):
        check_assertion(phi.arg, ctx)
        return
    if isinstance(phi, Comp):
        check_assertion(phi.first, ctx)
        check_assertion(phi.second, ctx)
        return
    raise TypeError(f"not an assertion: {phi!r}")
