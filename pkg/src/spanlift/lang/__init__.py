"""pWHILE syntax, typing and relational assertions."""

from .assertions import assign_subst, eval_assertion, substitute
from .ast import *  # noqa: F401,F403
from .entail import PROVED, UNKNOWN, entails
from .syntax import (abs_le, adj, parse_assertion, parse_cmd, parse_context, parse_expr,
                     parse_program, show_assertion, show_cmd, show_context, show_expr,
                     show_program)
from .typecheck import check_assertion, type_of, typecheck

__all__ = [
    "assign_subst", "eval_assertion", "substitute", "PROVED", "UNKNOWN", "entails", "abs_le", "adj",
    "parse_assertion", "parse_cmd", "parse_context", "parse_expr", "parse_program", "show_assertion",
    "show_cmd", "show_context", "show_expr", "show_program", "check_assertion", "type_of", "typecheck",
]
