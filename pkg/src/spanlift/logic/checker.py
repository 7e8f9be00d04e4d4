"""Bottom-up re-derivation of proof trees and the resulting certificates."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

from .. import __version__
from ..errors import InvalidParam, ParseError, RuleError, TypeCheckError
from ..lang.ast import Context
from ..lang.syntax import parse_assertion, parse_context, parse_program
from ..lang.typecheck import check_assertion, typecheck
from .flavors import Flavor, grades_close
from .judgment import Derivation, Judgment, derivation_from_json
from .rules import Env, apply_rule, defaults_from_conclusion

PROOF_FORMAT = "spanlift-proof/1"
CERT_FORMAT = "spanlift-certificate/1"


@dataclass
class Certificate:
    verdict: str  # ACCEPTED | REJECTED
    final_budget: Optional[Flavor] = None
    path: Optional[str] = None
    reason: Optional[str] = None
    message: str = ""
    assumptions: List[dict] = field(default_factory=list)
    experimental: List[dict] = field(default_factory=list)
    extensions: List[dict] = field(default_factory=list)
    nodes: int = 0
    strict: bool = False
    conclusion: Optional[dict] = None
    programs: Dict[str, str] = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == "ACCEPTED"

    def to_json(self) -> dict:
        out = {
            "format": CERT_FORMAT,
            "tool_version": __version__,
            "verdict": self.verdict,
            "strict": self.strict,
            "nodes": self.nodes,
        }
        if self.accepted:
            out["final_budget"] = self.final_budget.to_json()
            out["conclusion"] = self.conclusion
        else:
            out["rejected_at"] = self.path
            out["reason"] = self.reason
            out["message"] = self.message
        out["assumptions"] = self.assumptions
        out["experimental"] = self.experimental
        out["extensions"] = self.extensions
        out["programs"] = dict(sorted(self.programs.items()))
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


@lru_cache(maxsize=4096)
def _typecheck_cmd(c, ctx: Context):
    typecheck(c, ctx)


@lru_cache(maxsize=8192)
def _typecheck_assertion(phi, ctx: Context):
    check_assertion(phi, ctx)


def _well_typed(j: Judgment):
    _typecheck_cmd(j.left, j.ctx)
    _typecheck_cmd(j.right, j.ctx)
    _typecheck_assertion(j.pre, j.ctx)
    _typecheck_assertion(j.post, j.ctx)


def _compare(computed: Judgment, stated: Judgment):
    for name in ("left", "right", "pre", "post"):
        if getattr(computed, name) != getattr(stated, name):
            raise RuleError(f"stated {name} differs from what the rule produces", code="SHAPE_MISMATCH")
    if not computed.flavor.same_family(stated.flavor):
        raise RuleError(f"rule produces {computed.flavor}, stated {stated.flavor}", code="SHAPE_MISMATCH")
    if not grades_close(computed.flavor, stated.flavor):
        raise RuleError(f"rule produces {computed.flavor}, stated {stated.flavor}",
                        code="BAD_GRADE_ARITHMETIC")


def _check(d: Derivation, path: str, env: Env) -> Judgment:
    prem = [_check(p, f"{path}/{i}", env) for i, p in enumerate(d.premises)]
    env.path = path
    try:
        _well_typed(d.conclusion)
        side = defaults_from_conclusion(d.rule, d.conclusion)
        side.update(d.side)
        computed = apply_rule(d.rule, prem, side, env)
        _compare(computed, d.conclusion)
    except RuleError as exc:
        exc.info.setdefault("path", path)
        raise
    except TypeCheckError as exc:
        raise RuleError(exc.message, code=exc.code, path=path) from exc
    return d.conclusion


def check_derivation(d: Derivation, strict: bool = False, lemmas: Optional[dict] = None,
                     programs: Optional[Dict[str, str]] = None) -> Certificate:
    """Re-derive every node of ``d``; returns an ACCEPTED or REJECTED certificate."""
    env = Env(strict=strict, lemmas=dict(lemmas or {}))
    cert = Certificate("REJECTED", nodes=d.size(), strict=strict, programs=dict(programs or {}))
    try:
        root = _check(d, "root", env)
    except RuleError as exc:
        cert.path = exc.info.get("path", env.path)
        cert.reason = exc.code
        cert.message = exc.message
    else:
        cert.verdict = "ACCEPTED"
        cert.final_budget = root.flavor
        cert.conclusion = root.to_json()
    cert.assumptions = env.assumptions
    cert.experimental = env.experimental
    cert.extensions = env.extensions
    return cert


# -- proof files ------------------------------------------------------------------------


@dataclass
class ProofFile:
    derivation: Derivation
    ctx: Context
    lemmas: Dict[str, tuple]
    programs: Dict[str, str]  # name -> sha256


def sha256_file(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def load_proof(path: str, program_paths: Optional[Dict[str, str]] = None) -> ProofFile:
    """Read a proof file; referenced programs are loaded and hash-checked.

    ``program_paths`` overrides where a named program is read from.  Raises
    OSError for unreadable files and InvalidParam/ParseError for bad content.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidParam(f"{path}: not valid JSON ({exc})") from exc
    return proof_from_json(data, os.path.dirname(os.path.abspath(path)), program_paths)


def proof_from_json(data: dict, base_dir: str = ".", program_paths: Optional[Dict[str, str]] = None) -> ProofFile:
    if not isinstance(data, dict) or data.get("format") != PROOF_FORMAT:
        raise InvalidParam(f"expected a proof file with format {PROOF_FORMAT!r}")
    ctx = parse_context(data["context"])
    programs, hashes = {}, {}
    for name, ref in data.get("programs", {}).items():
        p = (program_paths or {}).get(name) or os.path.join(base_dir, ref["path"])
        digest = sha256_file(p)
        if ref.get("sha256") and ref["sha256"] != digest:
            raise InvalidParam(f"program {name!r} at {p} does not match the recorded sha256",
                               code="PROGRAM_HASH_MISMATCH")
        with open(p, encoding="utf-8") as fh:
            cmd, pctx = parse_program(fh.read())
        if pctx != ctx:
            raise InvalidParam(f"program {name!r} declares a different typing context than the proof")
        programs[name], hashes[name] = cmd, digest
    lemmas = {}
    for name, lem in data.get("lemmas", {}).items():
        lemmas[name] = (parse_assertion(lem["from"], ctx), parse_assertion(lem["to"], ctx))
    return ProofFile(derivation_from_json(data["proof"], ctx, programs), ctx, lemmas, hashes)


def check_proof_file(path: str, strict: bool = False, program_paths=None) -> Certificate:
    pf = load_proof(path, program_paths)
    return check_derivation(pf.derivation, strict=strict, lemmas=pf.lemmas, programs=pf.programs)


__all__ = ["Certificate", "ProofFile", "check_derivation", "check_proof_file", "load_proof",
           "proof_from_json", "sha256_file", "ParseError"]
