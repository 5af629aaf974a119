"""The ICaml calculus: a first-order imperative core of OCaml.

Types are ``unit``, ``int``, ``bool`` and ``ref t``; expressions are
variables, constants applied to exactly their arity, sequencing and
``let``.  Every node may carry its type (``ty``); trees straight from the
parser have ``ty=None`` and :func:`typecheck_icaml` fills them in.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import KW_ONLY, dataclass, field
from typing import Union

from .base import BOOL, INT, UNIT, Base, Span, Unit, literal_type, rebuild
from .diagnostics import TypeCheckError


@dataclass(frozen=True)
class Ref:
    inner: IType

    def __str__(self) -> str:
        return f"ref {self.inner}"


IType = Union[Unit, Base, Ref]


def ref_depth(t: IType) -> int:
    n = 0
    while isinstance(t, Ref):
        t, n = t.inner, n + 1
    return n


# ---------------------------------------------------------------------------
# Constants


@dataclass(frozen=True)
class _Param:
    """The type parameter ``t`` of a schematic constant signature."""

    def __str__(self) -> str:
        return "t"


T = _Param()


def _subst(t, arg: IType) -> IType:
    if t is T:
        return arg
    if isinstance(t, Ref):
        return Ref(_subst(t.inner, arg))
    return t


@dataclass(frozen=True)
class ConstSig:
    name: str
    params: tuple
    result: object

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def schematic(self) -> bool:
        return any(_mentions_param(t) for t in (*self.params, self.result))

    def instantiate(self, t: IType | None = None) -> tuple[tuple[IType, ...], IType]:
        """Argument and result types with the parameter replaced by ``t``."""
        if self.schematic and t is None:
            raise ValueError(f"{self.name} is schematic; an instance type is required")
        return tuple(_subst(p, t) for p in self.params), _subst(self.result, t)

    def __str__(self) -> str:
        return " -> ".join(str(t) for t in (*self.params, self.result))


def _mentions_param(t) -> bool:
    while isinstance(t, Ref):
        t = t.inner
    return t is T


_NAMED = {
    "true": ConstSig("true", (), BOOL),
    "false": ConstSig("false", (), BOOL),
    "()": ConstSig("()", (), UNIT),
    "+": ConstSig("+", (INT, INT), INT),
    "ref": ConstSig("ref", (T,), Ref(T)),
    "!": ConstSig("!", (Ref(T),), T),
    ":=": ConstSig(":=", (Ref(T), T), UNIT),
    "incr": ConstSig("incr", (Ref(INT),), UNIT),
}


class ConstTable(Mapping):
    """Signatures of the ICaml constants.

    Iterates over the named constants only; integer literals, of which
    there are infinitely many, are synthesised on lookup.
    """

    def __init__(self, named: Mapping[str, ConstSig]):
        self._named = dict(named)

    def __getitem__(self, name: str) -> ConstSig:
        if name in self._named:
            return self._named[name]
        if literal_type(name) is INT:
            return ConstSig(name, (), INT)
        raise KeyError(name)

    def __iter__(self) -> Iterator[str]:
        return iter(self._named)

    def __len__(self) -> int:
        return len(self._named)

    def lookup(self, name: str) -> ConstSig | None:
        return self.get(name)


_TABLE = ConstTable(_NAMED)


def constant_table() -> ConstTable:
    return _TABLE


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Node:
    _: KW_ONLY
    ty: IType | None = None
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    name: str


@dataclass(frozen=True)
class App1(Node):
    op: str
    arg: IExpr


@dataclass(frozen=True)
class App2(Node):
    op: str
    left: IExpr
    right: IExpr


@dataclass(frozen=True)
class Seq(Node):
    first: IExpr
    second: IExpr


@dataclass(frozen=True)
class Let(Node):
    name: str
    rhs: IExpr
    body: IExpr


IExpr = Union[Var, Const, App1, App2, Seq, Let]


_CHILDREN = {
    App1: lambda e: (e.arg,),
    App2: lambda e: (e.left, e.right),
    Seq: lambda e: (e.first, e.second),
    Let: lambda e: (e.rhs, e.body),
}


def children(e: IExpr) -> tuple[IExpr, ...]:
    f = _CHILDREN.get(type(e))
    return f(e) if f else ()


def with_children(e: IExpr, kids: tuple[IExpr, ...]) -> IExpr:
    if isinstance(e, App1):
        return rebuild(e, arg=kids[0])
    if isinstance(e, App2):
        return rebuild(e, left=kids[0], right=kids[1])
    if isinstance(e, Seq):
        return rebuild(e, first=kids[0], second=kids[1])
    if isinstance(e, Let):
        return rebuild(e, rhs=kids[0], body=kids[1])
    return e


def walk(e: IExpr) -> Iterator[IExpr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def size(e: IExpr) -> int:
    return sum(1 for _ in walk(e))


def strip_types(e: IExpr) -> IExpr:
    kids = tuple(strip_types(k) for k in children(e))
    return rebuild(with_children(e, kids), ty=None)


def free_vars(e: IExpr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Let):
        return free_vars(e.rhs) | (free_vars(e.body) - {e.name})
    out: set[str] = set()
    for k in children(e):
        out |= free_vars(k)
    return out


def is_binding_ref(e: Let) -> bool:
    """``let x = ref e in ...``: the shape that introduces a mutable variable."""
    return isinstance(e.rhs, App1) and e.rhs.op == "ref"


# ---------------------------------------------------------------------------
# Typechecking


def typecheck_icaml(e: IExpr, env: Mapping[str, IType] | None = None) -> IExpr:
    """Annotate every node of ``e`` with its type.

    Types are synthesised bottom-up; schematic constants are instantiated
    from their first argument.  Raises :class:`TypeCheckError`.
    """
    return _check(e, dict(env or {}))


def _check(e: IExpr, env: dict[str, IType]) -> IExpr:
    if isinstance(e, Var):
        if e.name not in env:
            raise TypeCheckError(f"unbound variable {e.name}", e.span)
        return rebuild(e, ty=env[e.name])
    if isinstance(e, Const):
        sig = _TABLE.get(e.name)
        if sig is None:
            raise TypeCheckError(f"unknown constant {e.name}", e.span)
        if sig.arity != 0:
            raise TypeCheckError(f"{e.name} expects {sig.arity} argument(s), got 0", e.span)
        return rebuild(e, ty=sig.result)
    if isinstance(e, (App1, App2)):
        sig = _TABLE.get(e.op)
        args = children(e)
        if sig is None:
            raise TypeCheckError(f"unknown constant {e.op}", e.span)
        if sig.arity != len(args):
            raise TypeCheckError(
                f"{e.op} expects {sig.arity} argument(s), got {len(args)}", e.span
            )
        checked = tuple(_check(a, env) for a in args)
        inst = None
        if sig.schematic:
            inst = _infer_instance(sig, checked[0])
        params, result = sig.instantiate(inst)
        for a, want in zip(checked, params):
            if a.ty != want:
                raise TypeCheckError(
                    f"argument type mismatch for {e.op}: expected {want}, got {a.ty}",
                    a.span or e.span,
                )
        return rebuild(with_children(e, checked), ty=result)
    if isinstance(e, Seq):
        a = _check(e.first, env)
        b = _check(e.second, env)
        return rebuild(e, first=a, second=b, ty=b.ty)
    if isinstance(e, Let):
        rhs = _check(e.rhs, env)
        body = _check(e.body, {**env, e.name: rhs.ty})
        return rebuild(e, rhs=rhs, body=body, ty=body.ty)
    raise TypeError(f"not an ICaml expression: {e!r}")


def _infer_instance(sig: ConstSig, first: IExpr) -> IType:
    # The first parameter of every schematic constant is t or ref t.
    pattern, actual = sig.params[0], first.ty
    while isinstance(pattern, Ref):
        if not isinstance(actual, Ref):
            raise TypeCheckError(
                f"argument type mismatch for {sig.name}: expected a reference, got {actual}",
                first.span,
            )
        pattern, actual = pattern.inner, actual.inner
    return actual
