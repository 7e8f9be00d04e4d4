"""Concrete syntax: tokenizer, recursive-descent parser and printer.

Programs::

    vars { x: real^4; i: int; y: real; }
    i <- 0;
    while i < 4 do { y <- y + x[i]; i <- i + 1 } bound 4;
    w <-$ Gauss(y, 0.125)

Assertions tag expressions with the memory they are read in (``y@1``) and
combine atoms with ``&&``, ``||``, ``!`` and ``->``.  ``abs(t) <= r`` and
``adj(x@1, x@2)`` are expanded while parsing.

Printing is the inverse of parsing: ``parse(show(ast)) == ast``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

from ..errors import ParseError
from .ast import (BOOL, INT, REAL, And, Assertion, Assign, Atom, Bern, BinOp, Bot, Cmd, Cmp,
                  Comp, Context, Dirac, Expr, Gauss, If, Index, Lap, Lit, Not, Or, PExpr,
                  Prim, RBin, RConst, RTerm, Sample, Seq, SinhGauss, Skip, Tagged, Top, UnOp,
                  Update, Var, VecLit, VecTy, While)

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<real>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><-\$|<-|->|<=|>=|==|!=|&&|\|\||[-+*/<>=!()\[\]{},;:@^])
""", re.VERBOSE)

KEYWORDS = {"vars", "skip", "if", "then", "else", "while", "do", "bound", "true", "false"}


class Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text}"


def tokenize(src: str) -> List[Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(line, pos - line_start + 1, "a token", src[pos])
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            toks.append(Tok(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


CMP = {"<=", ">=", "==", "!=", "<", ">", "="}
TERM_FOLLOW = {"+", "-", "*", "/", "@", "["}


class Parser:
    def __init__(self, src: str, ctx: Optional[Context] = None):
        self.toks = tokenize(src)
        self.pos = 0
        self.ctx = ctx

    # -- helpers --
    @property
    def tok(self) -> Tok:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text in texts

    def error(self, expected: str):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text or "end of input")

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(repr(text))
        t = self.tok
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.error("an identifier")
        self.pos += 1
        return t.text

    def int_lit(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.error("an integer")
        self.pos += 1
        return int(t.text)

    def attempt(self, fn: Callable):
        """Run fn; on a parse error rewind and return None."""
        save = self.pos
        try:
            return fn()
        except ParseError:
            self.pos = save
            return None

    def done(self):
        if self.tok.kind != "eof":
            self.error("end of input")

    # -- types and context --
    def ty(self):
        name = self.tok.text
        if name not in ("bool", "int", "real"):
            self.error("a type (bool, int, real)")
        self.pos += 1
        t = Prim(name)
        if self.accept("^"):
            t = VecTy(t, self.int_lit())
        return t

    def header(self) -> Context:
        self.expect("vars")
        self.expect("{")
        items = []
        while not self.at("}"):
            name = self.ident()
            self.expect(":")
            items.append((name, self.ty()))
            if not self.accept(";"):
                break
        self.expect("}")
        try:
            return Context(items)
        except ValueError as exc:
            self.error(str(exc))

    # -- expressions --
    def expr(self) -> Expr:
        e = self.conj()
        while self.at("||"):
            self.pos += 1
            e = BinOp("||", e, self.conj())
        return e

    def conj(self) -> Expr:
        e = self.comparison()
        while self.at("&&"):
            self.pos += 1
            e = BinOp("&&", e, self.comparison())
        return e

    def comparison(self) -> Expr:
        e = self.additive()
        if self.tok.kind == "op" and self.tok.text in CMP:
            op = self.tok.text
            self.pos += 1
            e = Cmp("==" if op == "=" else op, e, self.additive())
        return e

    def additive(self) -> Expr:
        e = self.multiplicative()
        while self.at("+", "-"):
            op = self.tok.text
            self.pos += 1
            e = BinOp(op, e, self.multiplicative())
        return e

    def multiplicative(self) -> Expr:
        e = self.unary()
        while self.at("*", "/"):
            op = self.tok.text
            self.pos += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.at("-"):
            if self.peek().kind in ("int", "real"):
                self.pos += 1
                lit = self.number()
                return Lit(-lit.value, lit.ty)
            self.pos += 1
            return UnOp("-", self.unary())
        if self.at("!"):
            self.pos += 1
            return UnOp("!", self.unary())
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.primary()
        while self.at("["):
            self.pos += 1
            i = self.expr()
            self.expect("]")
            e = Index(e, i)
        return e

    def number(self) -> Lit:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return Lit(int(t.text), INT)
        if t.kind == "real":
            self.pos += 1
            return Lit(Fraction(t.text), REAL)
        self.error("a number")

    def frac_lit(self) -> Lit:
        self.expect("frac")
        self.expect("(")
        neg = self.accept("-")
        n = self.int_lit()
        self.expect(",")
        d = self.int_lit()
        self.expect(")")
        if d == 0:
            self.error("a nonzero denominator")
        return Lit(Fraction(-n if neg else n, d), REAL)

    def primary(self) -> Expr:
        t = self.tok
        if t.kind in ("int", "real"):
            return self.number()
        if self.at("true", "false"):
            self.pos += 1
            return Lit(t.text == "true", BOOL)
        if self.at("frac") and self.peek().text == "(":
            return self.frac_lit()
        if self.at("min", "max") and self.peek().text == "(":
            self.pos += 2
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return BinOp(t.text, a, b)
        if self.at("upd") and self.peek().text == "(":
            self.pos += 2
            a = self.expr()
            self.expect(",")
            i = self.expr()
            self.expect(",")
            v = self.expr()
            self.expect(")")
            return Update(a, i, v)
        if self.at("("):
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if self.at("["):
            self.pos += 1
            items = [self.expr()]
            while self.accept(","):
                items.append(self.expr())
            self.expect("]")
            return VecLit(tuple(items))
        if t.kind != "ident" or t.text in KEYWORDS:
            self.error("an expression")
        return Var(self.ident())

    # -- probabilistic expressions and commands --
    def pexpr(self) -> PExpr:
        name = self.tok.text
        arity = {"Dirac": 1, "Bern": 1, "Lap": 2, "Gauss": 2, "SinhGauss": 3}
        if self.tok.kind != "ident" or name not in arity:
            self.error("a distribution (Dirac, Bern, Lap, Gauss, SinhGauss)")
        self.pos += 1
        self.expect("(")
        args = [self.expr()]
        for _ in range(arity[name] - 1):
            self.expect(",")
            args.append(self.expr())
        self.expect(")")
        return {"Dirac": Dirac, "Bern": Bern, "Lap": Lap, "Gauss": Gauss, "SinhGauss": SinhGauss}[name](*args)

    def block(self) -> Cmd:
        self.expect("{")
        if self.accept("}"):
            return Skip()
        c = self.stmts()
        self.expect("}")
        return c

    def stmts(self) -> Cmd:
        items = [self.stmt()]
        while self.accept(";"):
            if self.at("}") or self.tok.kind == "eof":
                break
            items.append(self.stmt())
        return items[0] if len(items) == 1 else Seq(tuple(items))

    def stmt(self) -> Cmd:
        if self.accept("skip"):
            return Skip()
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.block()
            orelse = self.block() if self.accept("else") else Skip()
            return If(cond, then, orelse)
        if self.accept("while"):
            cond = self.expr()
            self.expect("do")
            body = self.block()
            bound = self.int_lit() if self.accept("bound") else None
            if bound is not None and bound < 1:
                self.error("a positive loop bound")
            return While(cond, body, bound)
        if self.at("{"):
            return self.block()
        name = self.ident()
        index = None
        if self.accept("["):
            index = self.expr()
            self.expect("]")
        if self.accept("<-$"):
            return Sample(name, index, self.pexpr())
        if self.accept("<-"):
            return Assign(name, index, self.expr())
        self.error("'<-' or '<-$'")

    # -- assertions --
    def formula(self) -> Assertion:
        lhs = self.disjunction()
        if self.accept("->"):
            rhs = self.formula()
            return Or((Not(lhs), rhs))
        return lhs

    def disjunction(self) -> Assertion:
        items = [self.conjunction()]
        while self.accept("||"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Assertion:
        items = [self.negation()]
        while self.accept("&&"):
            items.append(self.negation())
        return items[0] if len(items) == 1 else And(tuple(items))

    def negation(self) -> Assertion:
        if self.at("!"):
            self.pos += 1
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Assertion:
        if self.at("true", "false") and self.peek().text != "@":
            t = self.tok.text
            self.pos += 1
            return Top() if t == "true" else Bot()
        if self.at("adj") and self.peek().text == "(":
            return self.adj()
        if self.at("abs") and self.peek().text == "(":
            self.pos += 2
            t = self.rterm()
            self.expect(")")
            if not self.at("<=", "<"):
                self.error("'<=' or '<' after abs(...)")
            op = self.tok.text
            self.pos += 1
            return abs_le(t, self.rterm(), strict=(op == "<"))
        if self.at("comp") and self.peek().text == "(":
            self.pos += 2
            a = self.formula()
            self.expect(",")
            b = self.formula()
            self.expect(")")
            return Comp(a, b)
        if self.at("("):
            # A parenthesised group is a term when an operator follows it.
            after = self.toks[self._closing(self.pos) + 1]
            if not (after.kind == "op" and (after.text in CMP or after.text in TERM_FOLLOW)):
                self.pos += 1
                f = self.formula()
                self.expect(")")
                return f
        return self.comparison_atom()

    def _closing(self, i: int) -> int:
        """Index of the ')' matching the '(' at i (the eof token if unbalanced)."""
        depth = 0
        for j in range(i, len(self.toks) - 1):
            t = self.toks[j]
            if t.kind == "op" and t.text in ("(", "["):
                depth += 1
            elif t.kind == "op" and t.text in (")", "]"):
                depth -= 1
                if depth == 0:
                    return j
        return len(self.toks) - 2

    def comparison_atom(self) -> Assertion:
        lhs = self.rterm()
        if self.tok.kind == "op" and self.tok.text in CMP:
            op = self.tok.text
            self.pos += 1
            return Atom("==" if op == "=" else op, lhs, self.rterm())
        return Atom("==", lhs, RConst(True, BOOL))

    def rterm(self) -> RTerm:
        t = self.rmul()
        while self.at("+", "-"):
            op = self.tok.text
            self.pos += 1
            t = RBin(op, t, self.rmul())
        return t

    def rmul(self) -> RTerm:
        t = self.runary()
        while self.at("*", "/"):
            op = self.tok.text
            self.pos += 1
            t = RBin(op, t, self.runary())
        return t

    def runary(self) -> RTerm:
        if self.at("-"):
            got = self.attempt(self.tagged_unary)
            if got is not None:
                return got
        if self.at("-") and self.peek().kind in ("int", "real") and self.peek(2).text != "@":
            self.pos += 1
            lit = self.number()
            return RConst(-lit.value, lit.ty)
        return self.rprimary()

    def tagged(self) -> RTerm:
        e = self.postfix()
        self.expect("@")
        return Tagged(e, self.int_lit())

    def tagged_unary(self) -> RTerm:
        e = self.unary()
        self.expect("@")
        return Tagged(e, self.int_lit())

    def rprimary(self) -> RTerm:
        got = self.attempt(self.tagged)
        if got is not None:
            return got
        t = self.tok
        if t.kind in ("int", "real"):
            lit = self.number()
            return RConst(lit.value, lit.ty)
        if self.at("frac"):
            lit = self.frac_lit()
            return RConst(lit.value, lit.ty)
        if self.at("true", "false"):
            self.pos += 1
            return RConst(t.text == "true", BOOL)
        if self.at("min", "max") and self.peek().text == "(":
            self.pos += 2
            a = self.rterm()
            self.expect(",")
            b = self.rterm()
            self.expect(")")
            return RBin(t.text, a, b)
        if self.accept("("):
            r = self.rterm()
            self.expect(")")
            return r
        self.error("a tagged expression like x@1")

    def adj(self) -> Assertion:
        self.pos += 2
        a = self.tagged()
        self.expect(",")
        b = self.tagged()
        self.expect(")")
        if not (isinstance(a.expr, Var) and isinstance(b.expr, Var) and a.expr == b.expr
                and (a.tag, b.tag) == (1, 2)):
            self.error("adj(v@1, v@2) on one vector variable")
        name = a.expr.name
        if self.ctx is None or name not in self.ctx or not isinstance(self.ctx[name], VecTy):
            self.error(f"a vector variable in context for adj, got {name!r}")
        return adj(name, self.ctx[name].dim)


def abs_le(t: RTerm, r: RTerm, strict: bool = False) -> Assertion:
    """|t| <= r as the conjunction t <= r && t >= -r."""
    op_hi, op_lo = ("<", ">") if strict else ("<=", ">=")
    if isinstance(r, RConst):
        neg = RConst(-r.value, r.ty)
    else:
        neg = RBin("-", RConst(0 if r_is_int(r) else Fraction(0), INT if r_is_int(r) else REAL), r)
    return And((Atom(op_hi, t, r), Atom(op_lo, t, neg)))


def r_is_int(r: RTerm) -> bool:
    return isinstance(r, RConst) and r.ty == INT


def adj(name: str, dim: int) -> Assertion:
    """Datasets differing in at most one row."""

    def eq(j):
        return Atom("==", Tagged(Index(Var(name), Lit(j, INT)), 1), Tagged(Index(Var(name), Lit(j, INT)), 2))

    parts = []
    for i in range(dim):
        others = [eq(j) for j in range(dim) if j != i]
        rest = others[0] if len(others) == 1 else And(tuple(others)) if others else Top()
        parts.append(Or((eq(i), rest)))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


# -- entry points -------------------------------------------------------------


def parse_program(src: str) -> Tuple[Cmd, Context]:
    p = Parser(src)
    ctx = p.header() if p.at("vars") else Context([])
    if p.tok.kind == "eof":
        return Skip(), ctx
    c = p.stmts()
    p.done()
    return c, ctx


@lru_cache(maxsize=4096)
def parse_cmd(src: str) -> Cmd:
    p = Parser(src)
    c = p.stmts()
    p.done()
    return c


def parse_expr(src: str) -> Expr:
    p = Parser(src)
    e = p.expr()
    p.done()
    return e


@lru_cache(maxsize=8192)
def parse_assertion(src: str, ctx: Optional[Context] = None) -> Assertion:
    p = Parser(src, ctx)
    f = p.formula()
    p.done()
    return f


def parse_context(src: str) -> Context:
    p = Parser(src)
    ctx = p.header()
    p.done()
    return ctx


# -- printer --------------------------------------------------------------------

_PREC = {"||": 1, "&&": 2, "+": 4, "-": 4, "*": 5, "/": 5}


def show_real(v: Fraction) -> str:
    v = Fraction(v)
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"frac({v.numerator}, {v.denominator})"
    k = max(twos, fives)
    n = abs(v.numerator) * (10 ** k) // v.denominator
    s = str(n).rjust(k + 1, "0")
    whole, frac = (s[:-k], s[-k:]) if k else (s, "0")
    return ("-" if v < 0 else "") + whole + "." + frac


def show_lit(value, ty) -> str:
    if ty == BOOL:
        return "true" if value else "false"
    if ty == INT:
        return str(value)
    return show_real(value)


def _prec(e) -> int:
    if isinstance(e, BinOp) and e.op in _PREC:
        return _PREC[e.op]
    if isinstance(e, Cmp):
        return 3
    if isinstance(e, UnOp):
        return 6
    if isinstance(e, Lit) and isinstance(e.value, (int, Fraction)) and not isinstance(e.value, bool) and e.value < 0:
        return 6
    return 7


def show_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        return show_lit(e.value, e.ty)
    if isinstance(e, VecLit):
        return "[" + ", ".join(show_expr(x) for x in e.items) + "]"
    if isinstance(e, BinOp):
        if e.op in ("min", "max"):
            return f"{e.op}({show_expr(e.left)}, {show_expr(e.right)})"
        p = _PREC[e.op]
        return f"{_wrap(e.left, p, False)} {e.op} {_wrap(e.right, p, True)}"
    if isinstance(e, Cmp):
        return f"{_wrap(e.left, 3, True)} {e.op} {_wrap(e.right, 3, True)}"
    if isinstance(e, UnOp):
        inner = show_expr(e.arg)
        if _prec(e.arg) < 7 or isinstance(e.arg, Lit):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Index):
        return f"{_wrap(e.arr, 7, False)}[{show_expr(e.idx)}]"
    if isinstance(e, Update):
        return f"upd({show_expr(e.arr)}, {show_expr(e.idx)}, {show_expr(e.val)})"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e, p: int, right: bool) -> str:
    s = show_expr(e)
    q = _prec(e)
    if q < p or (right and q == p):
        return f"({s})"
    return s


def show_pexpr(d: PExpr) -> str:
    name = type(d).__name__
    args = [getattr(d, f) for f in d.__dataclass_fields__]
    return f"{name}(" + ", ".join(show_expr(a) for a in args) + ")"


def show_cmd(c: Cmd, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(c, Skip):
        return pad + "skip"
    if isinstance(c, (Assign, Sample)):
        target = c.name + (f"[{show_expr(c.index)}]" if c.index is not None else "")
        if isinstance(c, Assign):
            return f"{pad}{target} <- {show_expr(c.expr)}"
        return f"{pad}{target} <-$ {show_pexpr(c.dist)}"
    if isinstance(c, Seq):
        return ";\n".join(_show_item(x, indent) for x in c.items)
    if isinstance(c, If):
        return (f"{pad}if {show_expr(c.cond)} then {_block(c.then, indent)}"
                f" else {_block(c.orelse, indent)}")
    if isinstance(c, While):
        s = f"{pad}while {show_expr(c.cond)} do {_block(c.body, indent)}"
        return s + (f" bound {c.bound}" if c.bound is not None else "")
    raise TypeError(f"not a command: {c!r}")


def _show_item(c: Cmd, indent: int) -> str:
    # A nested Seq inside a Seq only arises from hand-built ASTs; braces keep
    # the grouping so the printed text parses back to the same tree.
    if isinstance(c, Seq):
        return "  " * indent + _block(c, indent)
    return show_cmd(c, indent)


def _block(c: Cmd, indent: int) -> str:
    if isinstance(c, Skip):
        return "{ }"
    return "{\n" + show_cmd(c, indent + 1) + "\n" + "  " * indent + "}"


def show_context(ctx: Context) -> str:
    return "vars { " + " ".join(f"{n}: {t};" for n, t in ctx) + " }"


def show_program(c: Cmd, ctx: Context) -> str:
    return show_context(ctx) + "\n" + show_cmd(c) + "\n"


def show_rterm(t: RTerm) -> str:
    if isinstance(t, Tagged):
        inner = show_expr(t.expr)
        if _prec(t.expr) < 7:
            inner = f"({inner})"
        return f"{inner}@{t.tag}"
    if isinstance(t, RConst):
        return show_lit(t.value, t.ty)
    if isinstance(t, RBin):
        if t.op in ("min", "max"):
            return f"{t.op}({show_rterm(t.left)}, {show_rterm(t.right)})"
        p = _PREC[t.op]
        return f"{_rwrap(t.left, p, False)} {t.op} {_rwrap(t.right, p, True)}"
    raise TypeError(f"not a relational term: {t!r}")


def _rprec(t) -> int:
    if isinstance(t, RBin) and t.op in _PREC:
        return _PREC[t.op]
    if isinstance(t, RConst) and not isinstance(t.value, bool) and t.value < 0:
        return 6
    return 7


def _rwrap(t, p, right) -> str:
    s = show_rterm(t)
    q = _rprec(t)
    if q < p or (right and q == p):
        return f"({s})"
    return s


def show_assertion(f: Assertion) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Atom):
        return f"{show_rterm(f.left)} {f.op} {show_rterm(f.right)}"
    if isinstance(f, Not):
        return f"!({show_assertion(f.arg)})"
    if isinstance(f, And):
        return " && ".join(_fwrap(x, (And, Or)) for x in f.items)
    if isinstance(f, Or):
        return " || ".join(_fwrap(x, (Or,)) for x in f.items)
    if isinstance(f, Comp):
        return f"comp({show_assertion(f.first)}, {show_assertion(f.second)})"
    raise TypeError(f"not an assertion: {f!r}")


def _fwrap(f, kinds) -> str:
    s = show_assertion(f)
    return f"({s})" if isinstance(f, kinds) else s
