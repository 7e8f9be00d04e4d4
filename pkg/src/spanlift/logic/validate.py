"""Semantic checks: witness pairs for liftings, and oracle runs of judgments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..dist import SubDist, marginal
from ..divergences import DPDiv, RenyiDiv, TCDPDiv, ZCDPDiv, divergence
from ..errors import InvalidParam, PreconditionViolated
from ..interp import InterpConfig, project, run
from ..lang.assertions import eval_assertion
from ..lang.ast import Atom, Tagged, Var
from .flavors import Flavor
from .judgment import Judgment

MARGIN_TOL = 1e-9
DIV_TOL = 1e-9


@dataclass
class WitnessResult:
    ok: bool
    reason: Optional[str] = None  # MARGINAL_MISMATCH | DIVERGENCE_EXCEEDED | SUPPORT_VIOLATION
    value: Optional[float] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def _max_gap(a: SubDist, b: SubDist) -> float:
    keys = set(a) | set(b)
    return max((abs(a[x] - b[x]) for x in keys), default=0.0)


def check_witness_pair(relation, nu1: SubDist, nu2: SubDist, spec, delta: float,
                       mu1: SubDist, mu2: SubDist) -> WitnessResult:
    """Do (nu1, nu2) witness the lifting of ``relation`` from mu1 to mu2?

    ``relation`` is a finite set of pairs or a predicate on pairs.  The
    witnesses must live on the relation, have the right marginals (nu1 on the
    left, nu2 on the right) and be within ``delta`` under ``spec``.
    """
    holds = relation if callable(relation) else (lambda xy, rel=frozenset(relation): xy in rel)
    for nu in (nu1, nu2):
        for xy in nu:
            if not (isinstance(xy, tuple) and len(xy) == 2) or not holds(xy):
                return WitnessResult(False, "SUPPORT_VIOLATION", detail=f"{xy!r} is outside the relation")
    g1, g2 = _max_gap(marginal(nu1, 1), mu1), _max_gap(marginal(nu2, 2), mu2)
    if g1 > MARGIN_TOL or g2 > MARGIN_TOL:
        return WitnessResult(False, "MARGINAL_MISMATCH", detail=f"marginal gaps {g1:.3g}, {g2:.3g}")
    value, _ = divergence(spec, nu1, nu2)
    if value > delta + DIV_TOL:
        return WitnessResult(False, "DIVERGENCE_EXCEEDED", value, f"{value:.6g} > {delta:.6g}")
    return WitnessResult(True, None, value)


def diagonal(mu: SubDist) -> SubDist:
    """Embedding of mu on the equality relation."""
    return SubDist({(x, x): w for x, w in mu.items()}, dust=mu.dust)


# -- oracle ---------------------------------------------------------------------------


def flavor_spec(f: Flavor):
    """(divergence spec, claimed bound) for a flavor."""
    if f.kind == "DP":
        return DPDiv(f.epsilon), f.delta
    if f.kind == "RDP":
        return RenyiDiv(f.alpha), f.rho
    if f.kind == "zCDP":
        return ZCDPDiv(f.xi), f.rho
    return TCDPDiv(f.omega), f.rho


def output_variable(post) -> str:
    if (isinstance(post, Atom) and post.op == "==" and isinstance(post.left, Tagged)
            and isinstance(post.right, Tagged) and isinstance(post.left.expr, Var)
            and post.left.expr == post.right.expr and {post.left.tag, post.right.tag} == {1, 2}):
        return post.left.expr.name
    raise InvalidParam("empirical validation needs a post-condition of the form x@1 == x@2")


def empirical_validate(j: Judgment, inputs: Sequence[Tuple[tuple, tuple]], cfg: InterpConfig,
                       budget: Optional[Flavor] = None) -> dict:
    """Run both programs on each input pair and compare the flavor's divergence
    of the output variable's laws with the claimed budget."""
    f = budget or j.flavor
    x = output_variable(j.post)
    spec, claimed = flavor_spec(f)
    for k, (m1, m2) in enumerate(inputs):
        if not eval_assertion(j.pre, m1, m2, j.ctx):
            raise PreconditionViolated(f"input pair {k} does not satisfy the pre-condition", index=k)
    rows: List[dict] = []
    worst, slack = -math.inf, 1e-9
    for k, (m1, m2) in enumerate(inputs):
        out1, rep1 = run(j.left, j.ctx, m1, cfg)
        out2, rep2 = run(j.right, j.ctx, m2, cfg) if (j.right, m2) != (j.left, m1) else (out1, rep1)
        value, cert = divergence(spec, project(out1, j.ctx, x), project(out2, j.ctx, x))
        # Binning is post-processing; the unaccounted mass is what can move the value.
        pair_slack = 1e-9 + 10 * (rep1["tail"] + rep2["tail"]) + rep1["residual_mass"] + rep2["residual_mass"]
        slack = max(slack, pair_slack)
        worst = max(worst, value)
        row = {"index": k, "observed": value, "slack": pair_slack,
               "support": [rep1["output_support_size"], rep2["output_support_size"]],
               "tail": [rep1["tail"], rep2["tail"]],
               "residual": [rep1["residual_mass"], rep2["residual_mass"]]}
        if cert is not None:
            row["sup_certificate"] = cert.to_json()
        rows.append(row)
    return {
        "flavor": f.to_json(),
        "output": x,
        "claimed": claimed,
        "max_observed": worst if rows else None,
        "slack": slack,
        "within_budget": (not rows) or worst <= claimed + slack,
        "inputs": rows,
    }
