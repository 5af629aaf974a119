"""Structured errors reported by the parser, typecheckers and translators.

Every diagnostic renders as a single machine-parsable line
``KIND:LINE:COL:MESSAGE``; the line/column are 0 when no span is known.
"""

from __future__ import annotations

from .base import Span


class Diagnostic(Exception):
    kind = "Error"

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def format(self) -> str:
        line, col = (self.span.line, self.span.col) if self.span else (0, 0)
        return f"{self.kind}:{line}:{col}:{self.message}"

    def __str__(self) -> str:
        return self.format()


class ParseError(Diagnostic):
    kind = "SyntaxError"


class TypeCheckError(Diagnostic):
    kind = "TypeError"


class Untranslatable(Diagnostic):
    kind = "Untranslatable"


class RestrictionViolation(Diagnostic):
    """Rejection by the restricted (extant) translation.

    ``reasons`` lists every violation found, as ``(code, span)`` pairs, in
    traversal order; ``reason`` is the first code.
    """

    kind = "RestrictionViolation"

    # reason codes
    NON_BASE_REF = "non-base-ref"
    REF_LET = "ref-let"
    UNIT_LET = "unit-let"
    BARE_REF = "bare-ref"

    def __init__(self, reasons: list[tuple[str, Span | None]]):
        self.reasons = list(reasons)
        code, span = self.reasons[0]
        super().__init__(f"{code}: {_REASON_TEXT[code]}", span)

    @property
    def reason(self) -> str:
        return self.reasons[0][0]

    @property
    def codes(self) -> set[str]:
        return {code for code, _ in self.reasons}


_REASON_TEXT = {
    RestrictionViolation.NON_BASE_REF: "only references to int or bool are admitted",
    RestrictionViolation.REF_LET: "let-binding of a reference-typed value (aliasing)",
    RestrictionViolation.UNIT_LET: "let-binding of a unit-typed value",
    RestrictionViolation.BARE_REF: "reference-typed expression outside 'let x = ref e', '!x' or 'x := e'",
}


class NonBindingRef(Diagnostic):
    kind = "NonBindingRef"


class DuplicateName(Diagnostic):
    kind = "DuplicateName"


class UnliftedDeclaration(Diagnostic):
    kind = "UnliftedDeclaration"


class EvalError(RuntimeError):
    """Internal invariant violation during evaluation (a stuck or runaway program)."""
