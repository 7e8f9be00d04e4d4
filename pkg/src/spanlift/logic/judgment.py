"""Judgments, derivation trees and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

from ..errors import InvalidParam
from ..lang.ast import Cmd, Context
from ..lang.syntax import parse_assertion, parse_cmd, show_assertion, show_cmd
from .flavors import Flavor


@dataclass(frozen=True)
class Judgment:
    """ctx |- left ~[flavor] right : pre ==> post"""

    ctx: Context
    left: Cmd
    right: Cmd
    pre: object
    post: object
    flavor: Flavor

    def same_shape(self, other: "Judgment") -> bool:
        return (self.ctx == other.ctx and self.left == other.left and self.right == other.right
                and self.pre == other.pre and self.post == other.post
                and self.flavor.same_family(other.flavor))

    def to_json(self) -> dict:
        return {
            "left": show_cmd(self.left),
            "right": show_cmd(self.right),
            "pre": show_assertion(self.pre),
            "post": show_assertion(self.post),
            "flavor": self.flavor.to_json(),
        }

    def __str__(self):
        return (f"{show_cmd(self.left)!r} ~[{self.flavor}] {show_cmd(self.right)!r} : "
                f"{show_assertion(self.pre)} ==> {show_assertion(self.post)}")


@dataclass
class Derivation:
    rule: str
    conclusion: Judgment
    premises: List["Derivation"] = field(default_factory=list)
    side: Dict[str, Any] = field(default_factory=dict)

    def nodes(self, path: str = "root"):
        """Pre-order walk yielding (path, node, parent)."""
        stack = [(path, self, None)]
        while stack:
            p, node, parent = stack.pop()
            yield p, node, parent
            for i in reversed(range(len(node.premises))):
                stack.append((f"{p}/{i}", node.premises[i], node))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def to_json(self) -> dict:
        out = {"rule": self.rule, "conclusion": self.conclusion.to_json()}
        if self.side:
            out["side"] = dict(self.side)
        if self.premises:
            out["premises"] = [p.to_json() for p in self.premises]
        return out


def judgment_from_json(data: dict, ctx: Context, programs: Dict[str, Cmd] | None = None) -> Judgment:
    programs = programs or {}

    def cmd(src):
        if not isinstance(src, str):
            raise InvalidParam(f"command must be a string, got {type(src).__name__}")
        if src.startswith("@"):
            if src[1:] not in programs:
                raise InvalidParam(f"unknown program reference {src!r}")
            return programs[src[1:]]
        return parse_cmd(src)

    try:
        return Judgment(
            ctx,
            cmd(data["left"]),
            cmd(data["right"]),
            parse_assertion(data["pre"], ctx),
            parse_assertion(data["post"], ctx),
            Flavor.from_json(data["flavor"]),
        )
    except KeyError as exc:
        raise InvalidParam(f"judgment is missing field {exc}") from exc


def derivation_from_json(data: dict, ctx: Context, programs: Dict[str, Cmd] | None = None) -> Derivation:
    if not isinstance(data, dict) or "rule" not in data or "conclusion" not in data:
        raise InvalidParam("a derivation node needs 'rule' and 'conclusion'")
    return Derivation(
        data["rule"],
        judgment_from_json(data["conclusion"], ctx, programs),
        [derivation_from_json(p, ctx, programs) for p in data.get("premises", [])],
        dict(data.get("side", {})),
    )
