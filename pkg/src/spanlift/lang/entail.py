"""Sound, incomplete entailment between relational assertions.

``entails(phi, psi, ctx)`` answers PROVED only when every memory pair that
satisfies phi also satisfies psi; anything it cannot establish is UNKNOWN.

The procedure:

1. Both assertions become terms over tagged locations (``x@1``, ``v[2]@2``)
   and are put in negation normal form.  Boolean-valued subterms such as
   ``(i < 4)@1`` are unfolded into formulas.
2. The hypothesis is expanded to disjunctive normal form; each disjunct is
   handled separately.
3. Within a disjunct, equalities with a location on one side are turned into
   a substitution and applied everywhere, with constant folding (including
   read-over-write on vectors).  Contradictory constants close the case.
4. Each goal literal is tried syntactically, then against the hypothesis
   literals, then by a linear program over the linear hypotheses (nonlinear
   subterms are treated as opaque unknowns, which is sound).
5. If that fails and every remaining location is a bounded int or a bool,
   the finitely many assignments are enumerated.
6. Otherwise a bounded int location used as a symbolic array index is split
   into its values, and then a goal literal and its negation are split on.

Linear programs are solved in floating point; a goal counts as proved when
its optimum is within 1e-9 of the bound.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np
from scipy.optimize import linprog

from .ast import (BOOL, INT, REAL, And, Atom, BinOp, Bot, Cmp, Comp, Context, Index, Lit, Not,
                  Or, RBin, RConst, Tagged, Top, UnOp, Update, Var, VecLit, VecTy)

PROVED = "PROVED"
UNKNOWN = "UNKNOWN"

DNF_CAP = 4096
ENUM_CAP = 4096
LP_TOL = 1e-9
SPLIT_DEPTH = 2
SPLIT_WIDTH = 4
INDEX_SPLITS = 3
INDEX_SPAN = 16

NEG = {"<=": ">", ">": "<=", "<": ">=", ">=": "<", "==": "!=", "!=": "=="}
MIRROR = {"<=": ">=", ">=": "<=", "<": ">", ">": "<", "==": "==", "!=": "!="}
ARITH = ("+", "-", "*", "/", "min", "max")


class _TooBig(Exception):
    pass


# -- terms ----------------------------------------------------------------------


def expr_term(e, tag: int):
    if isinstance(e, Var):
        return ("v", e.name, tag)
    if isinstance(e, Lit):
        return ("c", e.value)
    if isinstance(e, VecLit):
        return ("vec",) + tuple(expr_term(x, tag) for x in e.items)
    if isinstance(e, BinOp):
        op = {"&&": "and", "||": "or"}.get(e.op, e.op)
        return (op, expr_term(e.left, tag), expr_term(e.right, tag))
    if isinstance(e, Cmp):
        return ("cmp", e.op, expr_term(e.left, tag), expr_term(e.right, tag))
    if isinstance(e, UnOp):
        return ("neg" if e.op == "-" else "not", expr_term(e.arg, tag))
    if isinstance(e, Index):
        return ("idx", expr_term(e.arr, tag), expr_term(e.idx, tag))
    if isinstance(e, Update):
        return ("upd", expr_term(e.arr, tag), expr_term(e.idx, tag), expr_term(e.val, tag))
    raise TypeError(f"not an expression: {e!r}")


def rel_term(t):
    if isinstance(t, Tagged):
        return expr_term(t.expr, t.tag)
    if isinstance(t, RConst):
        return ("c", t.value)
    if isinstance(t, RBin):
        return (t.op, rel_term(t.left), rel_term(t.right))
    raise TypeError(f"not a relational term: {t!r}")


def is_loc(t) -> bool:
    return t[0] == "v" or (t[0] == "idx" and t[2][0] == "c" and is_loc(t[1]))


def _contains(t, x) -> bool:
    if t == x:
        return True
    return t[0] not in ("c", "v") and any(isinstance(s, tuple) and _contains(s, x) for s in t[1:])


def _arith(op, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            return type(a)(0)
        if isinstance(a, int) and isinstance(b, int):
            return a // b
        return Fraction(a) / Fraction(b)
    return min(a, b) if op == "min" else max(a, b)


def _cmp(op, a, b) -> bool:
    return {"<=": a <= b, ">=": a >= b, "<": a < b, ">": a > b, "==": a == b, "!=": a != b}[op]


class Terms:
    """Typing, rewriting and linearization of terms under a context."""

    def __init__(self, ctx: Context):
        self.ctx = ctx

    def ty(self, t):
        k = t[0]
        if k == "v":
            return self.ctx[t[1]]
        if k == "c":
            return self._const_ty(t[1])
        if k in ARITH or k == "neg" or k == "upd":
            return self.ty(t[1])
        if k in ("cmp", "and", "or", "not"):
            return BOOL
        if k == "idx":
            return self.ty(t[1]).elem
        if k == "vec":
            return VecTy(self.ty(t[1]), len(t) - 1)
        raise TypeError(f"bad term {t!r}")

    def _const_ty(self, v):
        if isinstance(v, bool):
            return BOOL
        if isinstance(v, int):
            return INT
        if isinstance(v, tuple):
            return VecTy(self._const_ty(v[0]), len(v))
        return REAL

    def dim(self, t) -> Optional[int]:
        ty = self.ty(t)
        return ty.dim if isinstance(ty, VecTy) else None

    def rw(self, t, sub: Dict):
        """Apply the substitution and fold constants."""
        k = t[0]
        if k == "c":
            return t
        if k == "v":
            return self.rw(sub[t], sub) if t in sub else t
        args = tuple(self.rw(s, sub) if isinstance(s, tuple) else s for s in t[1:])
        t = (k,) + args
        if k in ARITH:
            a, b = args
            if a[0] == "c" and b[0] == "c":
                return ("c", _arith(k, a[1], b[1]))
            return t
        if k == "neg":
            return ("c", -args[0][1]) if args[0][0] == "c" else t
        if k == "not":
            return ("c", not args[0][1]) if args[0][0] == "c" else t
        if k in ("and", "or"):
            a, b = args
            vals = [x[1] for x in (a, b) if x[0] == "c"]
            if k == "and" and False in vals:
                return ("c", False)
            if k == "or" and True in vals:
                return ("c", True)
            if len(vals) == 2:
                return ("c", vals[0] and vals[1] if k == "and" else vals[0] or vals[1])
            return t
        if k == "cmp":
            op, a, b = args
            if a[0] == "c" and b[0] == "c":
                return ("c", _cmp(op, a[1], b[1]))
            if a == b:
                return ("c", op in ("==", "<=", ">="))
            return t
        if k == "vec":
            if all(x[0] == "c" for x in args):
                return ("c", tuple(x[1] for x in args))
            return t
        if k == "upd":
            a, i, v = args
            if a[0] == "c" and i[0] == "c" and v[0] == "c":
                arr = a[1]
                j = min(max(i[1], 0), len(arr) - 1)
                return ("c", arr[:j] + (v[1],) + arr[j + 1:])
            return t
        if k == "idx":
            a, i = args
            if i[0] != "c":
                return t
            n = self.dim(a)
            j = min(max(i[1], 0), n - 1) if n else i[1]
            if a[0] == "c":
                return ("c", a[1][j])
            if a[0] == "vec":
                return a[1 + j]
            if a[0] == "upd" and a[2][0] == "c" and n:
                jw = min(max(a[2][1], 0), n - 1)
                return a[3] if jw == j else self.rw(("idx", a[1], ("c", j)), sub)
            t = ("idx", a, ("c", j))
            return self.rw(sub[t], sub) if t in sub else t
        raise TypeError(f"bad term {t!r}")

    def lin(self, t):
        """Linear form {atom: coeff}, const of a numeric term."""
        k = t[0]
        if k == "c":
            return {}, Fraction(t[1])
        if k in ("+", "-"):
            (ca, ka), (cb, kb) = self.lin(t[1]), self.lin(t[2])
            s = 1 if k == "+" else -1
            out = dict(ca)
            for x, v in cb.items():
                out[x] = out.get(x, 0) + s * v
            return {x: v for x, v in out.items() if v != 0}, ka + s * kb
        if k == "neg":
            c, kk = self.lin(t[1])
            return {x: -v for x, v in c.items()}, -kk
        if k == "*":
            (ca, ka), (cb, kb) = self.lin(t[1]), self.lin(t[2])
            if not ca:
                return {x: ka * v for x, v in cb.items() if ka * v != 0}, ka * kb
            if not cb:
                return {x: kb * v for x, v in ca.items() if kb * v != 0}, ka * kb
        if k == "/" and self.ty(t) == REAL and t[2][0] == "c" and t[2][1] != 0:
            c, kk = self.lin(t[1])
            d = Fraction(t[2][1])
            return {x: v / d for x, v in c.items()}, kk / d
        return {t: Fraction(1)}, Fraction(0)


# -- formulas in negation normal form -----------------------------------------------
#
# True / False, ("AND", items), ("OR", items), ("L", op, a, b), ("OPQ", assertion, polarity)


def mk_and(items):
    out = []
    for x in items:
        if x is False:
            return False
        if x is True:
            continue
        out.extend(x[1] if x[0] == "AND" else [x])
    if not out:
        return True
    return out[0] if len(out) == 1 else ("AND", tuple(out))


def mk_or(items):
    out = []
    for x in items:
        if x is True:
            return True
        if x is False:
            continue
        out.extend(x[1] if x[0] == "OR" else [x])
    if not out:
        return False
    return out[0] if len(out) == 1 else ("OR", tuple(out))


class Formulas(Terms):
    def nnf(self, phi, pos: bool = True):
        if isinstance(phi, Top):
            return pos
        if isinstance(phi, Bot):
            return not pos
        if isinstance(phi, Atom):
            return self.atom(phi.op, rel_term(phi.left), rel_term(phi.right), pos)
        if isinstance(phi, And):
            parts = [self.nnf(x, pos) for x in phi.items]
            return mk_and(parts) if pos else mk_or(parts)
        if isinstance(phi, Or):
            parts = [self.nnf(x, pos) for x in phi.items]
            return mk_or(parts) if pos else mk_and(parts)
        if isinstance(phi, Not):
            return self.nnf(phi.arg, not pos)
        if isinstance(phi, Comp):
            return ("OPQ", phi, pos)
        raise TypeError(f"not an assertion: {phi!r}")

    def atom(self, op, a, b, pos):
        if self.ty(a) == BOOL:
            if op not in ("==", "!="):
                raise TypeError(f"ordering on booleans: {op}")
            if op == "!=":
                pos = not pos
            ap, an = self.bool_formula(a, True), self.bool_formula(a, False)
            bp, bn = self.bool_formula(b, True), self.bool_formula(b, False)
            if pos:
                return mk_or([mk_and([ap, bp]), mk_and([an, bn])])
            return mk_or([mk_and([ap, bn]), mk_and([an, bp])])
        return ("L", op if pos else NEG[op], a, b)

    def bool_formula(self, t, pos):
        k = t[0]
        if k == "c":
            return t[1] == pos
        if k == "cmp":
            return self.atom(t[1], t[2], t[3], pos)
        if k in ("and", "or"):
            parts = [self.bool_formula(t[1], pos), self.bool_formula(t[2], pos)]
            return mk_and(parts) if (k == "and") == pos else mk_or(parts)
        if k == "not":
            return self.bool_formula(t[1], not pos)
        return ("L", "==", t, ("c", pos))

    def split_int_ne(self, f):
        """Hypothesis-side: an int disequality is the disjunction of < and >."""
        if f is True or f is False:
            return f
        if f[0] in ("AND", "OR"):
            parts = [self.split_int_ne(x) for x in f[1]]
            return mk_and(parts) if f[0] == "AND" else mk_or(parts)
        if f[0] == "L" and f[1] == "!=" and self.ty(f[2]) == INT:
            return mk_or([("L", "<", f[2], f[3]), ("L", ">", f[2], f[3])])
        return f

    def dnf(self, f) -> List[tuple]:
        if f is True:
            return [()]
        if f is False:
            return []
        if f[0] == "OR":
            out = []
            for x in f[1]:
                out.extend(self.dnf(x))
                if len(out) > DNF_CAP:
                    raise _TooBig
            return out
        if f[0] == "AND":
            acc = [()]
            for x in f[1]:
                acc = [a + b for a in acc for b in self.dnf(x)]
                if len(acc) > DNF_CAP:
                    raise _TooBig
            return acc
        return [(f,)]


# -- per-disjunct reasoning -----------------------------------------------------------


class _Case:
    def __init__(self, fm: Formulas, lits):
        self.fm = fm
        self.sub: Dict = {}
        self.opaque = set()
        self.closed = False  # hypotheses are contradictory
        self._lp = None
        self._lp_infeasible = None
        self.lits = self._close(lits)
        self.litset = set(self.lits)

    def norm(self, lit):
        """Rewrite a literal; returns True/False when decided."""
        fm = self.fm
        _, op, a, b = lit
        a, b = fm.rw(a, self.sub), fm.rw(b, self.sub)
        if a[0] == "c" and b[0] == "c":
            return _cmp(op, a[1], b[1])
        if a == b:
            return op in ("==", "<=", ">=")
        if a[0] == "c" and b[0] != "c":
            a, b, op = b, a, MIRROR[op]
        if op == "!=" and b[0] == "c" and isinstance(b[1], bool):
            op, b = "==", ("c", not b[1])
        return ("L", op, a, b)

    def _close(self, lits):
        fm = self.fm
        pending = []
        for lit in lits:
            if lit[0] == "OPQ":
                self.opaque.add(lit)
            else:
                pending.append(lit)
        changed = True
        while changed and not self.closed:
            changed = False
            kept = []
            for lit in pending:
                r = self.norm(lit)
                if r is True:
                    continue
                if r is False:
                    self.closed = True
                    return []
                if r[1] == "==" and self._orient(r[2], r[3]):
                    changed = True
                    continue
                if r[1] == "==" and isinstance(fm.ty(r[2]), VecTy):
                    n = fm.dim(r[2])
                    kept.extend(("L", "==", ("idx", r[2], ("c", j)), ("idx", r[3], ("c", j)))
                                for j in range(n))
                    changed = True
                    continue
                kept.append(r)
            pending = kept
        out = []
        for lit in pending:
            r = self.norm(lit)
            if r is False:
                self.closed = True
                return []
            if r is not True:
                out.append(r)
        return out

    def _orient(self, a, b) -> bool:
        la, lb = is_loc(a), is_loc(b)
        if la and lb:
            if repr(a) < repr(b):
                a, b = b, a
        elif lb:
            a, b = b, a
        elif not la:
            return False
        if _contains(b, a) or a in self.sub:
            return False
        self.sub[a] = b
        return True

    # -- goals --
    def prove(self, g) -> bool:
        if g is True:
            return True
        if g is False:
            return False
        k = g[0]
        if k == "AND":
            return all(self.prove(x) for x in g[1])
        if k == "OR":
            return any(self.prove(x) for x in g[1])
        if k == "OPQ":
            return g in self.opaque
        return self.prove_lit(g)

    def prove_lit(self, lit) -> bool:
        r = self.norm(lit)
        if r is True or r is False:
            return r
        if r in self.litset or ("L", MIRROR[r[1]], r[3], r[2]) in self.litset:
            return True
        fm = self.fm
        _, op, a, b = r
        ty = fm.ty(a)
        if isinstance(ty, VecTy):
            if op != "==":
                return False
            return all(self.prove_lit(("L", "==", ("idx", a, ("c", j)), ("idx", b, ("c", j))))
                       for j in range(ty.dim))
        if ty == BOOL:
            return False
        if op == "==":
            return self.prove_lit(("L", "<=", a, b)) and self.prove_lit(("L", ">=", a, b))
        if op == "!=":
            return self.prove_lit(("L", "<", a, b)) or self.prove_lit(("L", ">", a, b))
        if op in (">=", ">"):
            a, b, op = b, a, MIRROR[op]
        # goal: a - b <= 0 (or < 0)
        ca, ka = fm.lin(a)
        cb, kb = fm.lin(b)
        coeffs = dict(ca)
        for x, v in cb.items():
            coeffs[x] = coeffs.get(x, 0) - v
        coeffs = {x: v for x, v in coeffs.items() if v != 0}
        const = ka - kb
        if ty == INT and op == "<":
            const, op = const + 1, "<="
        if not coeffs:
            return const <= 0 if op == "<=" else const < 0
        best = self._maximize(coeffs)
        if best is None:
            return False
        if best == "infeasible":
            return True
        value = best + float(const)
        return value <= LP_TOL if op == "<=" else value < -LP_TOL

    # -- linear programming --
    def _rows(self):
        if self._lp is None:
            fm = self.fm
            atoms: Dict = {}
            ub, eq = [], []
            for _, op, a, b in self.lits:
                ty = fm.ty(a)
                if ty not in (INT, REAL) or op == "!=":
                    continue
                if op in (">=", ">"):
                    a, b, op = b, a, MIRROR[op]
                ca, ka = fm.lin(a)
                cb, kb = fm.lin(b)
                row = dict(ca)
                for x, v in cb.items():
                    row[x] = row.get(x, 0) - v
                const = ka - kb
                if ty == INT and op == "<":
                    const += 1
                for x in row:
                    atoms.setdefault(x, len(atoms))
                (eq if op == "==" else ub).append((row, const))
            self._lp = (atoms, ub, eq)
        return self._lp

    def _matrices(self, atoms, rows, n):
        if not rows:
            return None, None
        A = np.zeros((len(rows), n))
        bvec = np.zeros(len(rows))
        for r, (row, const) in enumerate(rows):
            for x, v in row.items():
                A[r, atoms[x]] = float(v)
            bvec[r] = -float(const)
        return A, bvec

    def _maximize(self, coeffs):
        """max sum coeffs*x over the hypotheses; None if unbounded/failed."""
        atoms, ub, eq = self._rows()
        if any(x not in atoms for x in coeffs):
            return "infeasible" if self.lp_infeasible() else None
        n = len(atoms)
        c = np.zeros(n)
        for x, v in coeffs.items():
            c[atoms[x]] = -float(v)
        A_ub, b_ub = self._matrices(atoms, ub, n)
        A_eq, b_eq = self._matrices(atoms, eq, n)
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=[(None, None)] * n, method="highs")
        if res.status == 2:
            return "infeasible"
        if res.status != 0:
            return None
        return -res.fun

    def lp_infeasible(self) -> bool:
        if self._lp_infeasible is None:
            atoms, ub, eq = self._rows()
            n = len(atoms)
            if n == 0 or (not ub and not eq):
                self._lp_infeasible = False
            else:
                A_ub, b_ub = self._matrices(atoms, ub, n)
                A_eq, b_eq = self._matrices(atoms, eq, n)
                res = linprog(np.zeros(n), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                              bounds=[(None, None)] * n, method="highs")
                self._lp_infeasible = res.status == 2
        return self._lp_infeasible

    # -- finite enumeration --
    def enumerate(self, goal) -> bool:
        fm = self.fm
        locs = set()
        for lit in self.lits:
            _collect_locs(lit[2], locs)
            _collect_locs(lit[3], locs)
        if not _collect_goal_locs(goal, fm, self.sub, locs):
            return False
        domains = []
        for x in sorted(locs, key=repr):
            ty = fm.ty(x)
            if ty == BOOL:
                domains.append((x, (False, True)))
            elif ty == INT:
                lo, hi = self._bounds(x)
                if lo is None or hi is None or hi < lo:
                    return False
                domains.append((x, range(lo, hi + 1)))
            else:
                return False
        size = 1
        for _, d in domains:
            size *= len(d)
            if size > ENUM_CAP:
                return False
        names = [x for x, _ in domains]
        for values in itertools.product(*(d for _, d in domains)):
            sub = dict(self.sub)
            sub.update({x: ("c", v) for x, v in zip(names, values)})
            ok = True
            for lit in self.lits:
                v = _eval_lit(fm, lit, sub)
                if v is None:
                    return False
                if not v:
                    ok = False
                    break
            if not ok:
                continue
            if _eval_formula(fm, goal, sub) is not True:
                return False
        return True

    def symbolic_indices(self, goal) -> List:
        """Int locations used as non-constant array indices, in a stable order."""
        fm = self.fm
        found: List = []
        terms = [t for lit in self.lits for t in (lit[2], lit[3])]
        _goal_terms(goal, fm, self.sub, terms)
        for t in terms:
            _collect_index_locs(t, found)
        return [x for x in found if fm.ty(x) == INT]

    def _bounds(self, x):
        lo = hi = None
        for _, op, a, b in self.lits:
            if b[0] != "c":
                if a[0] == "c":
                    a, b, op = b, a, MIRROR[op]
                else:
                    continue
            if a != x:
                continue
            v = b[1]
            if op in (">=", ">", "=="):
                cand = v + 1 if op == ">" else v
                lo = cand if lo is None else max(lo, cand)
            if op in ("<=", "<", "=="):
                cand = v - 1 if op == "<" else v
                hi = cand if hi is None else min(hi, cand)
        return lo, hi


def _collect_locs(t, out):
    if is_loc(t):
        out.add(t)
        return
    if t[0] in ("c", "v"):
        return
    for s in t[1:]:
        if isinstance(s, tuple):
            _collect_locs(s, out)


def _collect_goal_locs(g, fm, sub, out) -> bool:
    if g is True or g is False:
        return True
    if g[0] in ("AND", "OR"):
        return all(_collect_goal_locs(x, fm, sub, out) for x in g[1])
    if g[0] == "OPQ":
        return False
    _collect_locs(fm.rw(g[2], sub), out)
    _collect_locs(fm.rw(g[3], sub), out)
    return True


def _goal_terms(g, fm, sub, out):
    if g is True or g is False or g[0] == "OPQ":
        return
    if g[0] in ("AND", "OR"):
        for x in g[1]:
            _goal_terms(x, fm, sub, out)
        return
    out.append(fm.rw(g[2], sub))
    out.append(fm.rw(g[3], sub))


def _collect_index_locs(t, out):
    if t[0] in ("c", "v"):
        return
    if t[0] in ("idx", "upd") and t[2][0] != "c" and is_loc(t[2]) and t[2] not in out:
        out.append(t[2])
    for s in t[1:]:
        if isinstance(s, tuple):
            _collect_index_locs(s, out)


def _eval_lit(fm, lit, sub):
    a, b = fm.rw(lit[2], sub), fm.rw(lit[3], sub)
    if a[0] == "c" and b[0] == "c":
        return _cmp(lit[1], a[1], b[1])
    return None


def _eval_formula(fm, g, sub):
    if g is True or g is False:
        return g
    if g[0] == "AND":
        vals = [_eval_formula(fm, x, sub) for x in g[1]]
        return False if False in vals else (None if None in vals else True)
    if g[0] == "OR":
        vals = [_eval_formula(fm, x, sub) for x in g[1]]
        return True if True in vals else (None if None in vals else False)
    if g[0] == "OPQ":
        return None
    return _eval_lit(fm, g, sub)


# -- entry point ------------------------------------------------------------------


@lru_cache(maxsize=16384)
def entails(phi, psi, ctx: Context) -> str:
    if phi == psi or isinstance(psi, Top) or isinstance(phi, Bot):
        return PROVED
    fm = Formulas(ctx)
    try:
        hyp = fm.split_int_ne(fm.nnf(phi))
        goal = fm.nnf(psi)
        cases = fm.dnf(hyp)
    except _TooBig:
        return UNKNOWN
    return PROVED if all(_solve(fm, lits, goal, SPLIT_DEPTH) for lits in cases) else UNKNOWN


def _solve(fm: Formulas, lits, goal, depth: int, index_splits: int = INDEX_SPLITS) -> bool:
    case = _Case(fm, lits)
    if case.closed or case.prove(goal):
        return True
    if case.lp_infeasible() or case.enumerate(goal):
        return True
    if index_splits > 0:
        for loc in case.symbolic_indices(goal):
            lo, hi = case._bounds(loc)
            if lo is None or hi is None or hi - lo >= INDEX_SPAN:
                continue
            return all(_solve(fm, lits + (("L", "==", loc, ("c", v)),), goal, depth, index_splits - 1)
                       for v in range(lo, hi + 1))
    if depth <= 0:
        return False
    # Case split on a goal literal: hyp && L and hyp && !L.
    for lit in _goal_lits(goal)[:SPLIT_WIDTH]:
        r = case.norm(lit)
        if r is True or r is False:
            continue
        pos = [lits + (r,)]
        neg = [lits + extra for extra in fm.dnf(fm.split_int_ne(("L", NEG[r[1]], r[2], r[3])))]
        if all(_solve(fm, ls, goal, depth - 1) for ls in pos + neg):
            return True
    return False


def _goal_lits(g, out=None):
    out = [] if out is None else out
    if g is True or g is False:
        return out
    if g[0] in ("AND", "OR"):
        for x in g[1]:
            _goal_lits(x, out)
    elif g[0] == "L" and g not in out:
        out.append(g)
    return out
