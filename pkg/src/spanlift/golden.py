"""Builders for the shipped example derivations and their mutations.

The derivations are produced forward with :func:`apply_rule`, so each node's
conclusion is exactly what the checker will recompute.  ``write_golden``
serializes programs (``*.pw``) and proofs (``*.json``) to a directory; the
copies under ``spanlift/data`` were produced this way.
"""

from __future__ import annotations

import json
import os
from dataclasses import replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .lang.ast import Context, While
from .lang.syntax import parse_assertion, parse_program, show_program, show_real
from .logic.checker import PROOF_FORMAT, sha256_file
from .logic.flavors import RDP, ZCDP, Flavor
from .logic.judgment import Derivation
from .logic.rules import Env, apply_rule

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
NAMES = ("attmean", "histogram", "foldg")

# -- a forward builder ----------------------------------------------------------


class Builder:
    def __init__(self, ctx: Context, flavor: Flavor):
        self.ctx = ctx
        self.flavor = flavor  # family used for grade-free leaves

    def A(self, src: str):
        return parse_assertion(src, self.ctx)

    def node(self, rule: str, premises=(), side: Optional[dict] = None, **given) -> Derivation:
        side = dict(side or {})
        eff = {"ctx": self.ctx, **given, **side}
        j = apply_rule(rule, [p.conclusion for p in premises], eff, Env())
        return Derivation(rule, j, list(premises), side)

    def assn(self, cmd, post) -> Derivation:
        return self.node("[assn]", left=cmd, right=cmd, post=post, flavor=self.flavor)

    def assigns(self, cmds, post) -> Derivation:
        """[assn]/[seq] backwards through deterministic assignments."""
        nodes = []
        for c in reversed(cmds):
            d = self.assn(c, post)
            nodes.insert(0, d)
            post = d.conclusion.pre
        return self.seqs(*nodes)

    def mech(self, rule: str, cmd, side: dict, flavor: Optional[Flavor] = None) -> Derivation:
        return self.node(rule, side=side, left=cmd, right=cmd, flavor=flavor or self.flavor)

    def seq(self, a: Derivation, b: Derivation) -> Derivation:
        return self.node("[seq]", [a, b])

    def seqs(self, *ds: Derivation) -> Derivation:
        out = ds[0]
        for d in ds[1:]:
            out = self.seq(out, d)
        return out

    def weak(self, d: Derivation, pre=None, post=None, flavor=None) -> Derivation:
        c = d.conclusion
        return self.node("[weak]", [d], pre=c.pre if pre is None else pre,
                         post=c.post if post is None else post, flavor=flavor or c.flavor)

    def frame(self, d: Derivation, theta: str) -> Derivation:
        return self.node("[frame]", [d], side={"frame": theta})

    def loop(self, cmd: While, invariant: str, variant: str, premises) -> Derivation:
        return self.node("[while]", premises, side={"invariant": invariant, "variant": variant,
                                                   "n": len(premises)}, left=cmd, right=cmd)

    def case(self, a: Derivation, b: Derivation) -> Derivation:
        return self.node("[case]", [a, b])


def _iter_shape(b: Builder, theta: str, k: int, n: int):
    from .lang.ast import And

    th = b.A(theta)
    pre = And((th, b.A(f"i@1 == {k}"), b.A(f"i@1 <= {n}")))
    post = And((th, b.A(f"i@1 > {k}")))
    return pre, post


def _parts(cmd) -> list:
    from .lang.ast import Seq

    return list(cmd.items) if isinstance(cmd, Seq) else [cmd]


def _num(v: Fraction) -> str:
    s = show_real(Fraction(v))
    return s if "." in s or "frac" in s else s + ".0"


# -- AttMean --------------------------------------------------------------------


def attmean_source(n: int = 4, rho: Fraction = Fraction(1, 4)) -> str:
    var = Fraction(1, 2 * n * n) / rho
    return (f"vars {{ x: real^{n}; i: int; y: real; z: real; w: real; }}\n"
            f"i <- 0;\ny <- 0.0;\n"
            f"while i < {n} do {{\n  y <- y + x[i];\n  i <- i + 1\n}} bound {n};\n"
            f"z <- y / {_num(n)};\nw <-$ Gauss(z, {_num(var)})\n")


def _box(name: str, n: int, hi: str, tags=(1, 2), lo: str = "0.0") -> str:
    return " && ".join(f"{lo} <= {name}[{j}]@{t} && {name}[{j}]@{t} <= {hi}" for t in tags for j in range(n))


def attmean_proof(n: int = 4, alpha: float = 2.0, rho: Fraction = Fraction(1, 4)):
    cmd, ctx = parse_program(attmean_source(n, rho))
    b = Builder(ctx, RDP(alpha, 0))
    items = _parts(cmd)
    init, loop_cmd, avg, noise = items[:2], items[2], items[3], items[4]
    p0 = f"adj(x@1, x@2) && {_box('x', n, '1.0')}"

    def partial(k):
        if k == 0:
            return "0.0"
        return " + ".join(f"x[{j}]@1 - x[{j}]@2" for j in range(k))

    disj = " || ".join(f"i@1 == {k} && y@1 - y@2 == {partial(k)}" for k in range(n + 1))
    theta = f"{p0} && i@1 == i@2 && ({disj})"
    body = _parts(loop_cmd.body)
    prems = []
    for k in range(n):
        pre, post = _iter_shape(b, theta, k, n)
        prems.append(b.weak(b.assigns(body, post), pre=pre))
    w = b.loop(loop_cmd, theta, "i", prems)
    r = Fraction(1, n)
    var = Fraction(1, 2 * n * n) / rho
    g = b.mech("[RDP-G]", noise, {"r": str(r), "sigma2": str(var)}, RDP(alpha, 0))
    z = b.assn(avg, g.conclusion.pre)
    after = b.seq(b.weak(w, post=z.conclusion.pre), z)
    start = b.weak(b.assigns(init, w.conclusion.pre), pre=b.A(p0))
    return b.seqs(start, after, g), cmd, ctx


# -- Histogram -------------------------------------------------------------------


def histogram_source(n: int = 2, T: int = 3, rho: Fraction = Fraction(1, 4)) -> str:
    zeros = "[" + ", ".join(["0.0"] * T) + "]"
    return (f"vars {{ x: int^{n}; y: real^{T}; z: real^{T}; t: real; i: int; }}\n"
            f"i <- 0;\ny <- {zeros};\n"
            f"while i < {n} do {{\n  y[x[i]] <- y[x[i]] + 1.0;\n  i <- i + 1\n}} bound {n};\n"
            f"i <- 0;\nz <- {zeros};\n"
            f"while i < {T} do {{\n  t <-$ Gauss(y[i], {_num(1 / rho)});\n  z[i] <- t;\n  i <- i + 1\n}} bound {T}\n")


def histogram_cases(n: int, T: int):
    """(I, K, L): row I is K on the left and L on the right; None: equal datasets."""
    out = [(I, K, L) for I in range(n) for K in range(T) for L in range(T) if K != L]
    return out + [None]


def _hist_case_pre(case, n, T):
    if case is None:
        eqs = " && ".join(f"x[{j}]@1 == x[{j}]@2" for j in range(n))
        return f"{eqs} && {_box('x', n, str(T - 1), tags=(1,), lo='0')}"
    I, K, L = case
    parts = [f"x[{I}]@1 == {K}", f"x[{I}]@2 == {L}"]
    for j in range(n):
        if j != I:
            parts += [f"x[{j}]@1 == x[{j}]@2", f"0 <= x[{j}]@1", f"x[{j}]@1 <= {T - 1}"]
    return " && ".join(parts)


def _diffs(case, T, counted: bool) -> str:
    d = [0] * T
    if case is not None and counted:
        _, K, L = case
        d[K], d[L] = 1, -1
    return " && ".join(f"y[{j}]@1 - y[{j}]@2 == {float(d[j])}" for j in range(T))


def _hist_case(b: Builder, case, n, T, rho, flavor, loop1, loop2, init1, init2):
    phi = _hist_case_pre(case, n, T)
    I = case[0] if case is not None else n
    disj1 = " || ".join(f"i@1 == {k} && {_diffs(case, T, I < k)}" for k in range(n + 1))
    theta1 = f"{phi} && i@1 == i@2 && ({disj1})"
    prems = []
    for k in range(n):
        pre, post = _iter_shape(b, theta1, k, n)
        prems.append(b.weak(b.assigns(_parts(loop1.body), post), pre=pre))
    w1 = b.loop(loop1, theta1, "i", prems)

    def zs(k):
        return " && ".join([f"i@1 == {k}"] + [f"z[{j}]@1 == z[{j}]@2" for j in range(k)])

    dfinal = _diffs(case, T, True)
    theta2 = f"{dfinal} && i@1 == i@2 && ({' || '.join(zs(k) for k in range(T + 1))})"
    sample, store, incr = _parts(loop2.body)
    var = 1 / rho
    prems = []
    for k in range(T):
        pre, post = _iter_shape(b, theta2, k, T)
        tail = b.assigns([store, incr], post)
        if case is not None and k in case[1:]:
            m = b.mech("[zCDP-G]", sample, {"r": "1", "sigma2": str(var)})
        else:
            m = b.mech("[zCDP-G-Eq]", sample, {"sigma2": str(var)})
        f = b.frame(m, f"({theta2}) && i@1 == {k}")
        body = b.seq(b.weak(f, post=tail.conclusion.pre), tail)
        prems.append(b.weak(body, pre=pre))
    w2 = b.loop(loop2, theta2, "i", prems)
    start = b.weak(b.assigns(init1, w1.conclusion.pre), pre=b.A(phi))
    mid = b.weak(b.assigns(init2, w2.conclusion.pre), pre=w1.conclusion.post)
    whole = b.seqs(start, w1, mid, w2)
    return b.weak(whole, post=b.A("z@1 == z@2"), flavor=flavor)


def histogram_proof(n: int = 2, T: int = 3, rho: Fraction = Fraction(1, 4)):
    cmd, ctx = parse_program(histogram_source(n, T, rho))
    b = Builder(ctx, ZCDP(0, 0))
    items = _parts(cmd)
    init1, loop1, init2, loop2 = items[:2], items[2], items[3:5], items[5]
    flavor = ZCDP(0, float(rho))
    leaves = [_hist_case(b, c, n, T, rho, flavor, loop1, loop2, init1, init2) for c in histogram_cases(n, T)]
    acc = leaves[-1]
    for d in reversed(leaves[:-1]):
        acc = b.case(d, acc)
    p0 = f"adj(x@1, x@2) && {_box('x', n, str(T - 1), lo='0')}"
    return b.weak(acc, pre=b.A(p0)), cmd, ctx


# -- FoldG ------------------------------------------------------------------------


def foldg_source(K: int = 3, sigma2: Fraction = Fraction(4), rows: int = 4) -> str:
    q = " + ".join(f"D[{j}]" for j in range(rows))
    return (f"vars {{ D: real^{rows}; i: int; x: real; y: real; z: real; }}\n"
            f"i <- 0;\nz <- 0.0;\n"
            f"while i < {K} do {{\n  x <- {q};\n  y <-$ Gauss(x, {_num(sigma2)});\n"
            f"  z <- z + y;\n  y <- 0.0;\n  i <- i + 1\n}} bound {K}\n")


def foldg_proof(K: int = 3, sigma2: Fraction = Fraction(4), rows: int = 4):
    cmd, ctx = parse_program(foldg_source(K, sigma2, rows))
    b = Builder(ctx, ZCDP(0, 0))
    init, loop_cmd = _parts(cmd)[:2], _parts(cmd)[2]
    p0 = f"adj(D@1, D@2) && {_box('D', rows, '1.0')}"
    theta = f"{p0} && i@1 == i@2 && z@1 == z@2"
    query, sample, acc, reset, incr = _parts(loop_cmd.body)
    prems = []
    for k in range(K):
        pre, post = _iter_shape(b, theta, k, K)
        tail = b.assigns([acc, reset, incr], post)
        g = b.mech("[zCDP-G]", sample, {"r": "1", "sigma2": str(sigma2)})
        f = b.frame(g, f"({theta}) && i@1 == {k}")
        noisy = b.weak(f, post=tail.conclusion.pre)
        q = b.assn(query, noisy.conclusion.pre)
        prems.append(b.weak(b.seqs(q, noisy, tail), pre=pre))
    w = b.loop(loop_cmd, theta, "i", prems)
    start = b.weak(b.assigns(init, w.conclusion.pre), pre=b.A(p0))
    return b.seqs(start, b.weak(w, post=b.A("z@1 == z@2"))), cmd, ctx


BUILDERS: Dict[str, Callable] = {"attmean": attmean_proof, "histogram": histogram_proof, "foldg": foldg_proof}

# -- serialization ---------------------------------------------------------------------


def proof_document(name: str, d: Derivation, cmd, ctx: Context, program_path: str) -> dict:
    root = d.to_json()
    root["conclusion"]["left"] = root["conclusion"]["right"] = "@" + name
    return {
        "format": PROOF_FORMAT,
        "context": show_program(cmd, ctx).splitlines()[0],
        "programs": {name: {"path": os.path.basename(program_path), "sha256": sha256_file(program_path)}},
        "lemmas": {},
        "proof": root,
    }


def write_golden(directory: str = DATA_DIR) -> Dict[str, str]:
    """Write every golden program and proof; returns name -> proof path."""
    os.makedirs(directory, exist_ok=True)
    out = {}
    for name, build in BUILDERS.items():
        d, cmd, ctx = build()
        prog = os.path.join(directory, f"{name}.pw")
        with open(prog, "w", encoding="utf-8") as fh:
            fh.write(show_program(cmd, ctx))
        doc = proof_document(name, d, cmd, ctx, prog)
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        out[name] = path
    return out


def golden_path(name: str) -> str:
    return os.path.join(DATA_DIR, f"{name}.json")


# -- mutations ---------------------------------------------------------------------------

SIDE_KEYS = ("r", "sigma2", "invariant", "variant", "n", "frame")


def _replace_at(d: Derivation, path: Tuple[int, ...], fn) -> Derivation:
    if not path:
        return fn(d)
    prem = list(d.premises)
    prem[path[0]] = _replace_at(prem[path[0]], path[1:], fn)
    return Derivation(d.rule, d.conclusion, prem, dict(d.side))


def _index_path(path: str) -> Tuple[int, ...]:
    return tuple(int(p) for p in path.split("/")[1:])


def _bump(d: Derivation) -> Derivation:
    f = d.conclusion.flavor
    return Derivation(d.rule, replace(d.conclusion, flavor=f.with_grade(f.a * 1.1, f.d * 1.1)),
                      list(d.premises), dict(d.side))


def _swap(d: Derivation) -> Derivation:
    return Derivation(d.rule, d.conclusion, list(reversed(d.premises)), dict(d.side))


def _drop(key):
    def fn(d: Derivation) -> Derivation:
        side = {k: v for k, v in d.side.items() if k != key}
        return Derivation(d.rule, d.conclusion, list(d.premises), side)

    return fn


def mutation_candidates(d: Derivation) -> Dict[str, List[Tuple[str, Derivation]]]:
    """All single-node mutations of the three kinds, keyed by kind."""
    out: Dict[str, List] = {"grade": [], "swap": [], "drop": []}
    for path, node, parent in d.nodes():
        ip = _index_path(path)
        f = node.conclusion.flavor
        if (node.rule not in ("[weak]", "[assume]") and (f.a > 0 or f.d > 0)
                and (parent is None or parent.rule != "[weak]")):
            out["grade"].append((f"grade+10% at {path} {node.rule}", _replace_at(d, ip, _bump)))
        if node.rule in ("[seq]", "[while]", "[case]") and len(node.premises) >= 2:
            if node.premises[0].conclusion != node.premises[-1].conclusion:
                out["swap"].append((f"swap premises at {path} {node.rule}", _replace_at(d, ip, _swap)))
        for key in SIDE_KEYS:
            if key in node.side:
                out["drop"].append((f"drop {key} at {path} {node.rule}", _replace_at(d, ip, _drop(key))))
    return out


def _spread(items: list, k: int) -> list:
    if len(items) <= k:
        return list(items)
    return [items[(i * (len(items) - 1)) // max(k - 1, 1)] for i in range(k)]


def golden_mutations(d: Derivation, total: int = 10, weights=(4, 3, 3)) -> List[Tuple[str, Derivation]]:
    """``total`` mutations spread over the three kinds; a kind with too few
    candidates hands its share to the others."""
    cands = mutation_candidates(d)
    kinds = ("grade", "swap", "drop")
    want = dict(zip(kinds, weights))
    short = sum(max(0, want[k] - len(cands[k])) for k in kinds)
    for k in kinds:
        want[k] = min(want[k], len(cands[k]))
    for k in kinds:
        extra = min(short, len(cands[k]) - want[k])
        want[k] += extra
        short -= extra
    out = []
    for k in kinds:
        out.extend(_spread(cands[k], want[k]))
    return out[:total]
