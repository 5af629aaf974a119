"""Types and source positions shared by every calculus in the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Unit:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class Base:
    name: str  # "int" or "bool"

    def __str__(self) -> str:
        return self.name


UNIT = Unit()
INT = Base("int")
BOOL = Base("bool")
BASE_TYPES = (INT, BOOL)


def is_int_literal(name: str) -> bool:
    return name.isdigit()


def literal_type(name: str):
    """Type of a 0-ary constant shared by all calculi, or None if not a literal."""
    if is_int_literal(name):
        return INT
    if name in ("true", "false"):
        return BOOL
    if name == "()":
        return UNIT
    return None


def rebuild(node, **changes):
    """Copy of a frozen dataclass instance with some fields changed.

    Same result as :func:`dataclasses.replace` but skips ``__init__``;
    tree rewrites call this hundreds of thousands of times.
    """
    new = object.__new__(type(node))
    new.__dict__.update(node.__dict__)
    new.__dict__.update(changes)
    return new
