"""Offshoring translations from ICaml to CoreC / CoreCE, plus the
name-hygiene and declaration-lifting passes that make their output
emittable as C.

=============  ========  ===================================================
strategy       target    treatment of ``let x = ref e``
=============  ========  ===================================================
``naive``      CoreC     ``t x = e``; every ref-typed name becomes a C
                         variable.  Wrong under aliasing, kept on purpose.
``extant``     CoreC     as naive, but only ``ref int``/``ref bool`` cells
                         and no ref-typed plain lets; everything else is
                         rejected with a reason code.
``ptr-*``      CoreCE    every ``ref e`` is a fresh stack cell, names of
                         ref type are ``t * const`` pointers.
``final``      CoreCE    ``t x = e`` and ``x`` is used through ``&x``;
                         every other let becomes a const declaration.
=============  ========  ===================================================
"""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass, field

from . import corecalc as cc
from . import icaml as ic
from .base import INT, UNIT, Base, Unit, rebuild
from .corecalc import BinderType, Mode, Ptr
from .diagnostics import (DuplicateName, NonBindingRef, RestrictionViolation,
                          Untranslatable)


class Strategy(enum.Enum):
    NAIVE = "naive"
    EXTANT = "extant"
    PTR_ARRAY = "ptr-array"
    PTR_ALLOCA = "ptr-alloca"
    FINAL = "final"

    @property
    def target(self) -> Mode:
        return Mode.COREC if self in (Strategy.NAIVE, Strategy.EXTANT) else Mode.CORECE


class PtrVariant(enum.Enum):
    ARRAY1 = "array1"   # t z[1] = {e}; z
    ALLOCA = "alloca"   # t z = e; &z


class RefPolicy(enum.Enum):
    """What the final translation does with ``ref e`` outside ``let x = ref e``."""

    STRICT = "strict"
    ALLOCA = "alloca"


class FreshNames:
    """Supply of names ``z``, ``z1``, ``z2``, ... that avoid a given set."""

    def __init__(self, avoid: Iterable[str] = (), prefix: str = "z"):
        self.used = set(avoid)
        self.prefix = prefix
        self.counter = 0

    def __call__(self) -> str:
        while True:
            name = self.prefix if self.counter == 0 else f"{self.prefix}{self.counter}"
            self.counter += 1
            if name not in self.used:
                self.used.add(name)
                return name


@dataclass
class TransContext:
    mutable: frozenset[str] = frozenset()
    fresh: FreshNames = field(default_factory=FreshNames)


def all_names(e) -> set[str]:
    names = set()
    for n in (ic.walk(e) if _is_icaml(e) else cc.walk(e)):
        if isinstance(n, (ic.Var, ic.Let, cc.Var, cc.Decl, cc.AddrOf, cc.Assign)):
            names.add(n.name)
    return names


def _is_icaml(e) -> bool:
    return isinstance(e, (ic.Var, ic.Const, ic.App1, ic.App2, ic.Seq, ic.Let))


def _types_in(e: ic.IExpr):
    for n in ic.walk(e):
        yield n, n.ty


def _require_types(e: ic.IExpr):
    if e.ty is None:
        raise ValueError("translation needs a type-annotated tree; run typecheck_icaml first")


# ---------------------------------------------------------------------------
# Type translations

def erase_ref(t):
    """Type mapping of the naive/extant translations: ``ref t`` becomes ``t``."""
    return t.inner if isinstance(t, ic.Ref) else t


def pointer_type(t):
    """``ref t`` becomes ``ptr t``, recursively; base types are unchanged."""
    if isinstance(t, ic.Ref):
        return Ptr(pointer_type(t.inner))
    return t


# ---------------------------------------------------------------------------
# Naive (historical, unsound under aliasing)


def translate_naive(e: ic.IExpr) -> cc.CExpr:
    _require_types(e)
    for node, t in _types_in(e):
        if ic.ref_depth(t) > 1:
            raise Untranslatable(f"nested reference type {t} has no CoreC counterpart", node.span)
    return _naive(e)


def _naive(e):
    if isinstance(e, ic.Var):
        return cc.Var(e.name, ty=erase_ref(e.ty), span=e.span)
    if isinstance(e, ic.Const):
        return cc.Const(e.name, ty=e.ty, span=e.span)
    if isinstance(e, ic.App1):
        if e.op == "ref":
            raise Untranslatable("ref outside 'let x = ref e' is not translatable", e.span)
        if not isinstance(e.arg, ic.Var):
            raise Untranslatable(f"{e.op} applied to a non-variable is not translatable", e.span)
        x = cc.Var(e.arg.name, ty=erase_ref(e.arg.ty), span=e.arg.span)
        if e.op == "!":
            return x
        if e.op == "incr":
            return _bump(x, e.span)
    if isinstance(e, ic.App2):
        if e.op == ":=":
            if not isinstance(e.left, ic.Var):
                raise Untranslatable(":= applied to a non-variable is not translatable", e.span)
            return cc.Assign(e.left.name, _naive(e.right), ty=UNIT, span=e.span)
        return cc.App2(e.op, _naive(e.left), _naive(e.right), ty=e.ty, span=e.span)
    if isinstance(e, ic.Seq):
        return cc.Seq(_naive(e.first), _naive(e.second), ty=e.ty, span=e.span)
    if isinstance(e, ic.Let):
        rhs = e.rhs.arg if ic.is_binding_ref(e) else e.rhs
        return cc.Decl(BinderType(erase_ref(e.rhs.ty)), e.name, _naive(rhs), _naive(e.body),
                       ty=e.ty, span=e.span)
    raise Untranslatable(f"no translation for {e!r}", getattr(e, "span", None))


def _bump(x: cc.Var, span) -> cc.Assign:
    one = cc.Const("1", ty=INT)
    return cc.Assign(x.name, cc.App2("+", x, one, ty=INT), ty=UNIT, span=span)


# ---------------------------------------------------------------------------
# Extant (restricted, sound on what it accepts)


def _has_non_base_ref(t) -> bool:
    while isinstance(t, ic.Ref):
        if not isinstance(t.inner, Base):
            return True
        t = t.inner
    return False


def translate_extant(e: ic.IExpr) -> cc.CExpr:
    """Translate, or raise :class:`RestrictionViolation` listing every violation."""
    _require_types(e)
    tr = _Extant()
    out = tr.go(e)
    if tr.violations:
        raise RestrictionViolation(tr.violations)
    return out


class _Extant:
    def __init__(self):
        self.violations: list = []

    def flag(self, code: str, e):
        entry = (code, e.span)
        if entry not in self.violations:
            self.violations.append(entry)

    def go(self, e):
        if _has_non_base_ref(e.ty):
            self.flag(RestrictionViolation.NON_BASE_REF, e)
        if isinstance(e, ic.Var):
            if isinstance(e.ty, ic.Ref):
                self.flag(RestrictionViolation.BARE_REF, e)
            return cc.Var(e.name, ty=erase_ref(e.ty), span=e.span)
        if isinstance(e, ic.Const):
            return cc.Const(e.name, ty=e.ty, span=e.span)
        if isinstance(e, ic.App1):
            if e.op == "ref" or not isinstance(e.arg, ic.Var):
                self.flag(RestrictionViolation.BARE_REF, e)
                self.go(e.arg)
                return cc.Const("()", ty=UNIT)  # discarded: the translation fails
            x = self.cell(e.arg)
            return x if e.op == "!" else _bump(x, e.span)
        if isinstance(e, ic.App2):
            if e.op == ":=":
                right = self.go(e.right)
                if not isinstance(e.left, ic.Var):
                    self.flag(RestrictionViolation.BARE_REF, e)
                    self.go(e.left)
                    return cc.Const("()", ty=UNIT)
                x = self.cell(e.left)
                return cc.Assign(x.name, right, ty=UNIT, span=e.span)
            return cc.App2(e.op, self.go(e.left), self.go(e.right), ty=e.ty, span=e.span)
        if isinstance(e, ic.Seq):
            return cc.Seq(self.go(e.first), self.go(e.second), ty=e.ty, span=e.span)
        if isinstance(e, ic.Let):
            t = e.rhs.ty
            if ic.is_binding_ref(e):
                if _has_non_base_ref(t):
                    self.flag(RestrictionViolation.NON_BASE_REF, e)
                init = self.go(e.rhs.arg)
            elif isinstance(t, ic.Ref):
                self.flag(RestrictionViolation.REF_LET, e)
                if isinstance(e.rhs, ic.Var):  # the alias itself; nothing more to report
                    init = cc.Var(e.rhs.name, ty=erase_ref(t), span=e.rhs.span)
                else:
                    init = self.go(e.rhs)
            else:
                if isinstance(t, Unit):
                    self.flag(RestrictionViolation.UNIT_LET, e)
                init = self.go(e.rhs)
            return cc.Decl(BinderType(erase_ref(t)), e.name, init, self.go(e.body),
                           ty=e.ty, span=e.span)
        raise Untranslatable(f"no translation for {e!r}", getattr(e, "span", None))

    def cell(self, v: ic.Var) -> cc.Var:
        """A variable naming a base-type cell, used under ``!``, ``:=`` or ``incr``."""
        if _has_non_base_ref(v.ty):
            self.flag(RestrictionViolation.NON_BASE_REF, v)
        return cc.Var(v.name, ty=erase_ref(v.ty), span=v.span)


# ---------------------------------------------------------------------------
# Pointer translation: ref cells become stack-allocated arrays or scalars


def translate_ptr(e: ic.IExpr, variant: PtrVariant = PtrVariant.ARRAY1,
                  fresh: FreshNames | None = None) -> cc.CExpr:
    _require_types(e)
    fresh = fresh or FreshNames(all_names(e))
    return _Ptr(PtrVariant(variant), fresh).go(e)


class _Ptr:
    def __init__(self, variant: PtrVariant, fresh: FreshNames):
        self.variant = variant
        self.fresh = fresh

    def go(self, e):
        t = pointer_type(e.ty)
        if isinstance(e, ic.Var):
            return cc.Var(e.name, ty=t, span=e.span)
        if isinstance(e, ic.Const):
            return cc.Const(e.name, ty=t, span=e.span)
        if isinstance(e, ic.App1):
            arg = self.go(e.arg)
            if e.op == "ref":
                return _stack_cell(self.variant, self.fresh(), arg, e.span)
            op = cc.LOAD if e.op == "!" else e.op
            return cc.App1(op, arg, ty=t, span=e.span)
        if isinstance(e, ic.App2):
            op = cc.STORE if e.op == ":=" else e.op
            return cc.App2(op, self.go(e.left), self.go(e.right), ty=t, span=e.span)
        if isinstance(e, ic.Seq):
            return cc.Seq(self.go(e.first), self.go(e.second), ty=t, span=e.span)
        if isinstance(e, ic.Let):
            binder_t = pointer_type(e.rhs.ty)
            binder = BinderType(binder_t, is_const=isinstance(binder_t, Ptr))
            return cc.Decl(binder, e.name, self.go(e.rhs), self.go(e.body), ty=t, span=e.span)
        raise Untranslatable(f"no translation for {e!r}", getattr(e, "span", None))


def _stack_cell(variant: PtrVariant, z: str, init: cc.CExpr, span) -> cc.Decl:
    t = init.ty
    if variant is PtrVariant.ARRAY1:
        binder, use = BinderType(t, is_array=True), cc.Var(z, ty=Ptr(t))
    else:
        binder, use = BinderType(t), cc.AddrOf(z, ty=Ptr(t))
    return cc.Decl(binder, z, init, use, ty=Ptr(t), span=span)


# ---------------------------------------------------------------------------
# Final translation: mutable variables are the let-ref bound names


def translate_final(e: ic.IExpr, ctx: TransContext | None = None,
                    ref_policy: RefPolicy = RefPolicy.STRICT) -> cc.CExpr:
    _require_types(e)
    if ctx is None:
        ctx = TransContext(fresh=FreshNames(all_names(e)))
    return _Final(RefPolicy(ref_policy), ctx.fresh).go(e, ctx.mutable)


class _Final:
    def __init__(self, policy: RefPolicy, fresh: FreshNames):
        self.policy = policy
        self.fresh = fresh

    def go(self, e, mutable: frozenset[str]):
        t = pointer_type(e.ty)
        if isinstance(e, ic.Var):
            if e.name in mutable:
                return cc.AddrOf(e.name, ty=t, span=e.span)
            return cc.Var(e.name, ty=t, span=e.span)
        if isinstance(e, ic.Const):
            return cc.Const(e.name, ty=t, span=e.span)
        if isinstance(e, ic.App1):
            if e.op == "ref":
                if self.policy is RefPolicy.STRICT:
                    raise NonBindingRef("ref outside 'let x = ref e' needs dynamic allocation",
                                        e.span)
                return _stack_cell(PtrVariant.ALLOCA, self.fresh(), self.go(e.arg, mutable),
                                   e.span)
            op = cc.LOAD if e.op == "!" else e.op
            return cc.App1(op, self.go(e.arg, mutable), ty=t, span=e.span)
        if isinstance(e, ic.App2):
            op = cc.STORE if e.op == ":=" else e.op
            return cc.App2(op, self.go(e.left, mutable), self.go(e.right, mutable),
                           ty=t, span=e.span)
        if isinstance(e, ic.Seq):
            return cc.Seq(self.go(e.first, mutable), self.go(e.second, mutable), ty=t, span=e.span)
        if isinstance(e, ic.Let):
            if ic.is_binding_ref(e):
                init = self.go(e.rhs.arg, mutable)
                body = self.go(e.body, mutable | {e.name})
                binder = BinderType(init.ty)
            else:
                init = self.go(e.rhs, mutable)
                body = self.go(e.body, mutable - {e.name})
                binder = BinderType(init.ty, is_const=True)
            return cc.Decl(binder, e.name, init, body, ty=t, span=e.span)
        raise Untranslatable(f"no translation for {e!r}", getattr(e, "span", None))


# ---------------------------------------------------------------------------


def translate(e: ic.IExpr, strategy: Strategy | str,
              ref_policy: RefPolicy | str = RefPolicy.STRICT) -> cc.CExpr:
    strategy = Strategy(strategy)
    if strategy is Strategy.NAIVE:
        return translate_naive(e)
    if strategy is Strategy.EXTANT:
        return translate_extant(e)
    if strategy is Strategy.PTR_ARRAY:
        return translate_ptr(e, PtrVariant.ARRAY1)
    if strategy is Strategy.PTR_ALLOCA:
        return translate_ptr(e, PtrVariant.ALLOCA)
    return translate_final(e, ref_policy=RefPolicy(ref_policy))


# ---------------------------------------------------------------------------
# Alpha renaming


def alpha_rename(e, avoid: Iterable[str] = ()):
    """Rename binders apart so every binder in ``e`` is distinct.

    The first binder of each name keeps it unless the name is in
    ``avoid``; later ones get ``name_1``, ``name_2``, ...  Free variables
    are untouched.  Works on ICaml and CoreC/CoreCE trees.
    """
    avoid = set(avoid)
    icaml = _is_icaml(e)
    binders = [n.name for n in (ic.walk(e) if icaml else cc.walk(e))
               if isinstance(n, (ic.Let, cc.Decl))]
    if len(set(binders)) == len(binders) and avoid.isdisjoint(binders):
        return e
    r = _Renamer(all_names(e) | avoid, avoid)
    if icaml:
        return r.icaml(e, {})
    return r.core(e, {})


class _Renamer:
    def __init__(self, used: set[str], avoid: set[str]):
        self.used = used
        self.avoid = avoid
        self.seen: set[str] = set()

    def binder(self, name: str) -> str:
        if name not in self.seen and name not in self.avoid:
            self.seen.add(name)
            return name
        k = 1
        while f"{name}_{k}" in self.used:
            k += 1
        new = f"{name}_{k}"
        self.used.add(new)
        self.seen.add(new)
        return new

    def icaml(self, e, env: dict):
        if isinstance(e, ic.Var):
            return rebuild(e, name=env.get(e.name, e.name))
        if isinstance(e, ic.Let):
            rhs = self.icaml(e.rhs, env)
            new = self.binder(e.name)
            return rebuild(e, name=new, rhs=rhs, body=self.icaml(e.body, {**env, e.name: new}))
        return ic.with_children(e, tuple(self.icaml(k, env) for k in ic.children(e)))

    def core(self, e, env: dict):
        if isinstance(e, (cc.Var, cc.AddrOf)):
            return rebuild(e, name=env.get(e.name, e.name))
        if isinstance(e, cc.Assign):
            return rebuild(e, name=env.get(e.name, e.name), value=self.core(e.value, env))
        if isinstance(e, cc.Decl):
            init = None if e.init is None else self.core(e.init, env)
            new = self.binder(e.name)
            return rebuild(e, name=new, init=init, body=self.core(e.body, {**env, e.name: new}))
        return cc.with_children(e, tuple(self.core(k, env) for k in cc.children(e)))


# ---------------------------------------------------------------------------
# Declaration lifting


def lift_declarations(e: cc.CExpr, mode: Mode | None = None) -> cc.CExpr:
    """Move declarations out of expression position.

    Declarations on the statement spine (the program's top-level chain of
    declarations and sequencing, including initializers of spine
    declarations) stay put with their initializers.  A declaration nested
    inside an operand is hoisted to the top of the program without an
    initializer, and its initialization becomes an assignment at the
    original position::

        (int x = 1+2; x+3)+4   ==>   int x; (x := 1+2; x+3)+4

    Hoisted ``const`` binders lose ``const`` since they are now assigned.
    Binder names must be unique (see :func:`alpha_rename`).
    """
    seen: set[str] = set()
    for d in cc.declarations(e):
        if d.name in seen:
            raise DuplicateName(f"{d.name} is declared more than once; rename binders apart first",
                                d.span)
        seen.add(d.name)
    if mode is None:
        mode = Mode.CORECE if cc.uses_corece(e) else Mode.COREC
    lifter = _Lifter(mode)
    out = lifter.spine(e)
    for shell in reversed(lifter.hoisted):
        out = cc.Decl(shell.binder, shell.name, None, out, ty=out.ty, span=shell.span)
    return out


class _Lifter:
    def __init__(self, mode: Mode):
        self.mode = mode
        self.hoisted: list[cc.Decl] = []

    def spine(self, e):
        if isinstance(e, cc.Seq):
            return rebuild(e, first=self.spine(e.first), second=self.spine(e.second))
        if isinstance(e, cc.Decl):
            init = e.init
            if isinstance(init, cc.Seq):
                # t x = (a; b); body  ==>  a; t x = b; body
                return self.spine(cc.Seq(init.first, rebuild(e, init=init.second),
                                         ty=e.ty, span=init.span))
            if isinstance(init, cc.Decl):
                # t x = (u y = i; b); body  ==>  u y = i; t x = b; body
                return self.spine(rebuild(init, body=rebuild(e, init=init.body), ty=e.ty))
            new_init = None if init is None else self.expr(init)
            return rebuild(e, init=new_init, body=self.spine(e.body))
        return self.expr(e)

    def expr(self, e):
        if isinstance(e, cc.Decl):
            b = e.binder
            self.hoisted.append(cc.Decl(rebuild(b, is_const=False), e.name, None,
                                        cc.Const("()"), span=e.span))
            init = None if e.init is None else self.expr(e.init)
            body = self.expr(e.body)
            if init is None:
                return body
            return cc.Seq(self.initialize(b, e.name, init), body, ty=body.ty, span=e.span)
        kids = cc.children(e)
        new = tuple(self.expr(k) for k in kids)
        if all(a is b for a, b in zip(kids, new)):
            return e
        return cc.with_children(e, new)

    def initialize(self, b: BinderType, name: str, init: cc.CExpr) -> cc.CExpr:
        if b.is_array:
            return cc.App2(cc.STORE, cc.Var(name, ty=Ptr(b.base)), init, ty=UNIT)
        if self.mode is Mode.COREC:
            return cc.Assign(name, init, ty=UNIT)
        return cc.App2(cc.STORE, cc.AddrOf(name, ty=Ptr(b.base)), init, ty=UNIT)


def is_lifted(e: cc.CExpr) -> bool:
    """True if no declaration occurs outside the statement spine."""
    def spine_ok(n) -> bool:
        if isinstance(n, cc.Seq):
            return spine_ok(n.first) and spine_ok(n.second)
        if isinstance(n, cc.Decl):
            return (n.init is None or no_decl(n.init)) and spine_ok(n.body)
        return no_decl(n)

    def no_decl(n) -> bool:
        return not any(isinstance(k, cc.Decl) for k in cc.walk(n))

    return spine_ok(e)
