"""CoreC and CoreCE: the modelled subsets of C.

Both calculi share one tree type.  CoreC has declarations and assignment
``x := e`` as a special form.  CoreCE drops the special form and adds
pointer types, ``&x``, and the constants ``*`` (load) and ``←`` (store),
plus ``const`` binders and the one-element array binder ``t z[1]`` used by
the pointer translation.  The calculus a tree belongs to is checked, not
encoded in its Python type; see :class:`Mode`.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator, Mapping
from dataclasses import KW_ONLY, dataclass, field
from typing import Union

from .base import INT, UNIT, Base, Span, Unit, literal_type, rebuild
from .diagnostics import TypeCheckError


class Mode(enum.Enum):
    COREC = "CoreC"
    CORECE = "CoreCE"


@dataclass(frozen=True)
class Ptr:
    inner: CType

    def __str__(self) -> str:
        return f"ptr {self.inner}"


CType = Union[Unit, Base, Ptr]

STORE = "←"
LOAD = "*"


@dataclass(frozen=True)
class BinderType:
    base: CType
    is_const: bool = False
    is_array: bool = False

    @property
    def var_type(self) -> CType:
        """Type of the declared variable when used as an expression."""
        return Ptr(self.base) if self.is_array else self.base

    def __str__(self) -> str:
        return f"const {self.base}" if self.is_const else str(self.base)


@dataclass(frozen=True)
class Node:
    _: KW_ONLY
    ty: CType | None = None
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
    arg: CExpr


@dataclass(frozen=True)
class App2(Node):
    op: str
    left: CExpr
    right: CExpr


@dataclass(frozen=True)
class Seq(Node):
    first: CExpr
    second: CExpr


@dataclass(frozen=True)
class Decl(Node):
    """``binder name = init; body``; ``init`` is None only after lifting."""

    binder: BinderType
    name: str
    init: CExpr | None
    body: CExpr


@dataclass(frozen=True)
class Assign(Node):
    """CoreC's special-form assignment ``name := value``."""

    name: str
    value: CExpr


@dataclass(frozen=True)
class AddrOf(Node):
    name: str


CExpr = Union[Var, Const, App1, App2, Seq, Decl, Assign, AddrOf]


_CHILDREN = {
    App1: lambda e: (e.arg,),
    App2: lambda e: (e.left, e.right),
    Seq: lambda e: (e.first, e.second),
    Decl: lambda e: (e.body,) if e.init is None else (e.init, e.body),
    Assign: lambda e: (e.value,),
}


def children(e: CExpr) -> tuple[CExpr, ...]:
    f = _CHILDREN.get(type(e))
    return f(e) if f else ()


def with_children(e: CExpr, kids: tuple[CExpr, ...]) -> CExpr:
    if isinstance(e, App1):
        return rebuild(e, arg=kids[0])
    if isinstance(e, App2):
        return rebuild(e, left=kids[0], right=kids[1])
    if isinstance(e, Seq):
        return rebuild(e, first=kids[0], second=kids[1])
    if isinstance(e, Decl):
        if e.init is None:
            return rebuild(e, body=kids[0])
        return rebuild(e, init=kids[0], body=kids[1])
    if isinstance(e, Assign):
        return rebuild(e, value=kids[0])
    return e


def walk(e: CExpr) -> Iterator[CExpr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def strip_types(e: CExpr) -> CExpr:
    kids = tuple(strip_types(k) for k in children(e))
    return rebuild(with_children(e, kids), ty=None)


def declarations(e: CExpr) -> list[Decl]:
    return [n for n in walk(e) if isinstance(n, Decl)]


def uses_corece(e: CExpr) -> bool:
    """True if ``e`` contains any construct that exists only in CoreCE."""
    for n in walk(e):
        if isinstance(n, AddrOf):
            return True
        if isinstance(n, (App1, App2)) and n.op in (LOAD, STORE, "incr"):
            return True
        if isinstance(n, Decl) and (n.binder.is_const or n.binder.is_array
                                    or isinstance(n.binder.base, Ptr)):
            return True
    return False


def embed(e: CExpr) -> CExpr:
    """Rewrite a CoreC tree into CoreCE: ``x := e`` becomes ``&x ← e``."""
    kids = tuple(embed(k) for k in children(e))
    e = with_children(e, kids)
    if isinstance(e, Assign):
        target = AddrOf(e.name, ty=None if e.value.ty is None else Ptr(e.value.ty), span=e.span)
        return App2(STORE, target, e.value, ty=e.ty, span=e.span)
    return e


# ---------------------------------------------------------------------------
# Typechecking


def typecheck_corec(e: CExpr, env: Mapping | None = None) -> CExpr:
    """Annotate a CoreC tree.  Raises :class:`TypeCheckError`."""
    return _Checker(Mode.COREC).check(e, _binders(env))


def typecheck_corece(e: CExpr, env: Mapping | None = None) -> CExpr:
    """Annotate a CoreCE tree.  Raises :class:`TypeCheckError`."""
    return _Checker(Mode.CORECE).check(e, _binders(env))


def typecheck(e: CExpr, mode: Mode, env: Mapping | None = None) -> CExpr:
    return _Checker(mode).check(e, _binders(env))


def _binders(env: Mapping | None) -> dict[str, BinderType]:
    out = {}
    for name, t in (env or {}).items():
        out[name] = t if isinstance(t, BinderType) else BinderType(t)
    return out


class _Checker:
    def __init__(self, mode: Mode):
        self.mode = mode

    def fail(self, msg: str, e: CExpr):
        raise TypeCheckError(msg, e.span)

    def corece_only(self, what: str, e: CExpr):
        if self.mode is Mode.COREC:
            self.fail(f"{what} is not part of CoreC", e)

    def valid_type(self, t: CType, e: CExpr):
        if isinstance(t, Ptr):
            self.corece_only("pointer type", e)
            self.valid_type(t.inner, e)

    def check(self, e: CExpr, env: dict[str, BinderType]) -> CExpr:
        if isinstance(e, Var):
            if e.name not in env:
                self.fail(f"unbound variable {e.name}", e)
            return rebuild(e, ty=env[e.name].var_type)
        if isinstance(e, Const):
            t = literal_type(e.name)
            if t is None:
                self.fail(f"unknown constant {e.name}", e)
            return rebuild(e, ty=t)
        if isinstance(e, AddrOf):
            self.corece_only("address-of", e)
            if not isinstance(e.name, str):
                self.fail("address-of requires a variable", e)
            b = env.get(e.name)
            if b is None:
                self.fail(f"unbound variable {e.name}", e)
            if b.is_array:
                self.fail(f"cannot take the address of array {e.name}", e)
            return rebuild(e, ty=Ptr(b.base))
        if isinstance(e, Assign):
            if self.mode is Mode.CORECE:
                self.fail("special-form assignment is not part of CoreCE", e)
            b = env.get(e.name)
            if b is None:
                self.fail(f"unbound variable {e.name}", e)
            value = self.check(e.value, env)
            if value.ty != b.base:
                self.fail(f"type mismatch in assignment to {e.name}: "
                          f"expected {b.base}, got {value.ty}", e)
            return rebuild(e, value=value, ty=UNIT)
        if isinstance(e, App1):
            arg = self.check(e.arg, env)
            if e.op == LOAD:
                self.corece_only("*", e)
                if not isinstance(arg.ty, Ptr):
                    self.fail(f"* expects a pointer, got {arg.ty}", e)
                return rebuild(e, arg=arg, ty=arg.ty.inner)
            if e.op == "incr":
                self.corece_only("incr", e)
                if arg.ty != Ptr(INT):
                    self.fail(f"incr expects ptr int, got {arg.ty}", e)
                self.check_writable(arg, env)
                return rebuild(e, arg=arg, ty=UNIT)
            self.fail(f"unknown unary constant {e.op}", e)
        if isinstance(e, App2):
            left = self.check(e.left, env)
            right = self.check(e.right, env)
            if e.op == "+":
                if left.ty != INT or right.ty != INT:
                    self.fail(f"+ expects int operands, got {left.ty} and {right.ty}", e)
                return rebuild(e, left=left, right=right, ty=INT)
            if e.op == STORE:
                self.corece_only("←", e)
                if not isinstance(left.ty, Ptr) or left.ty.inner != right.ty:
                    self.fail(f"type mismatch in store: {left.ty} ← {right.ty}", e)
                self.check_writable(left, env)
                return rebuild(e, left=left, right=right, ty=UNIT)
            self.fail(f"unknown binary constant {e.op}", e)
        if isinstance(e, Seq):
            a = self.check(e.first, env)
            b = self.check(e.second, env)
            return rebuild(e, first=a, second=b, ty=b.ty)
        if isinstance(e, Decl):
            b = e.binder
            if b.is_const or b.is_array:
                self.corece_only("const binder" if b.is_const else "array binder", e)
            if b.is_const and b.is_array:
                self.fail("array binders cannot be const", e)
            self.valid_type(b.base, e)
            init = None
            if e.init is None:
                if b.is_const:
                    self.fail(f"const declaration of {e.name} needs an initializer", e)
            else:
                init = self.check(e.init, env)
                if init.ty != b.base:
                    self.fail(f"type mismatch in declaration of {e.name}: "
                              f"expected {b.base}, got {init.ty}", e)
            body = self.check(e.body, {**env, e.name: b})
            return rebuild(e, init=init, body=body, ty=body.ty)
        raise TypeError(f"not a CoreC/CoreCE expression: {e!r}")

    def check_writable(self, target: CExpr, env: dict[str, BinderType]):
        if isinstance(target, AddrOf) and env[target.name].is_const:
            self.fail(f"cannot assign to const variable {target.name}", target)


def address_of(e) -> AddrOf:
    """Build ``&x``; only variables have addresses."""
    if not isinstance(e, (Var, str)):
        raise TypeCheckError("address-of requires a variable", getattr(e, "span", None))
    return AddrOf(e if isinstance(e, str) else e.name)


# ---------------------------------------------------------------------------
# Printing in the calculus notation

_EXPR, _ASN, _ADD, _UNARY = range(4)


def show(e: CExpr) -> str:
    """Render in the notation of the calculi, e.g. ``int x = 0; &x ← *&x + 1``."""
    return _show(e, _EXPR)


def show_binder(b: BinderType) -> str:
    return str(b)


def _paren(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def _show(e: CExpr, ctx: int) -> str:
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, AddrOf):
        return f"&{e.name}"
    if isinstance(e, App1):
        if e.op == LOAD:
            return f"*{_show(e.arg, _UNARY)}"
        return f"{e.op} {_show(e.arg, _UNARY)}"
    if isinstance(e, App2):
        if e.op == "+":
            return _paren(f"{_show(e.left, _ADD)} + {_show(e.right, _UNARY)}", ctx > _ADD)
        return _paren(f"{_show(e.left, _ADD)} {e.op} {_show(e.right, _ASN)}", ctx > _ASN)
    if isinstance(e, Assign):
        return _paren(f"{e.name} := {_show(e.value, _ASN)}", ctx > _ASN)
    if isinstance(e, Seq):
        return _paren(f"{_show(e.first, _ASN)}; {_show(e.second, _EXPR)}", ctx > _EXPR)
    if isinstance(e, Decl):
        b = e.binder
        if b.is_array:
            head = f"{b.base} {e.name}[1]"
            init = None if e.init is None else "{" + _show(e.init, _ASN) + "}"
        else:
            head = f"{b} {e.name}"
            init = None if e.init is None else _show(e.init, _ASN)
        decl = head if init is None else f"{head} = {init}"
        return _paren(f"{decl}; {_show(e.body, _EXPR)}", ctx > _EXPR)
    raise TypeError(f"not a CoreC/CoreCE expression: {e!r}")

