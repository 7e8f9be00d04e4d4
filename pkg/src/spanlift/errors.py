"""Error types shared across the package.

Every error carries a machine-readable ``code`` so callers (and the CLI)
can dispatch on it without string matching.
"""

from __future__ import annotations


class SpanliftError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", code: str | None = None, **info):
        if code is not None:
            self.code = code
        self.info = info
        super().__init__(f"{self.code}: {message}" if message else self.code)
        self.message = message


class InvalidParam(SpanliftError, ValueError):
    code = "INVALID_PARAM"


class NumericLimitDiverged(SpanliftError, ArithmeticError):
    code = "NUMERIC_LIMIT_DIVERGED"


class DomainMismatch(SpanliftError, KeyError):
    code = "DOMAIN_MISMATCH"

    def __str__(self):
        return Exception.__str__(self)


class ShapeError(SpanliftError, ValueError):
    code = "SHAPE_ERROR"


class InvalidGrid(SpanliftError, ValueError):
    code = "INVALID_GRID"


class UnsupportedPair(SpanliftError, ValueError):
    code = "UNSUPPORTED_PAIR"


class UndefinedLoss(SpanliftError, ZeroDivisionError):
    code = "UNDEFINED_LOSS"


class InvalidPartition(SpanliftError, ValueError):
    code = "INVALID_PARTITION"


class UnsupportedProperty(SpanliftError, ValueError):
    code = "UNSUPPORTED_PROPERTY"


class ParseError(SpanliftError):
    """Positioned syntax error."""

    code = "SYNTAX_ERROR"

    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line, self.col, self.expected, self.found = line, col, expected, found
        msg = f"line {line}, col {col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg, line=line, col=col, expected=expected)


class TypeCheckError(SpanliftError, TypeError):
    """Raised with codes TYPE_MISMATCH, UNBOUND_VARIABLE, GUARD_NOT_BOOL, BAD_TAG."""

    code = "TYPE_MISMATCH"


class MissingGrid(SpanliftError, KeyError):
    code = "MISSING_GRID"

    def __str__(self):
        return Exception.__str__(self)


class PreconditionViolated(SpanliftError, ValueError):
    code = "PRECONDITION_VIOLATED"


class FlavorMismatch(SpanliftError, ValueError):
    code = "FLAVOR_MISMATCH"


class UnsupportedDirection(SpanliftError, ValueError):
    code = "UNSUPPORTED_DIRECTION"


class UnsupportedFlavor(SpanliftError, ValueError):
    code = "UNSUPPORTED_FLAVOR"


class RuleError(SpanliftError):
    """A rule application failed; ``code`` is one of the checker reason codes."""

    code = "SHAPE_MISMATCH"
