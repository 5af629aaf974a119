"""Environment + store interpreters for ICaml, CoreC and CoreCE.

In ICaml a variable denotes a *value*; binding a location therefore
aliases it.  In the C calculi a variable denotes a *location*:
declarations allocate a fresh cell holding a copy of the initializer.
The same :class:`Store` serves all three.  Evaluation is left to right.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Union

from . import corecalc as cc
from . import icaml as ic
from .diagnostics import EvalError

DEFAULT_MAX_STEPS = 10**6


@dataclass(frozen=True)
class VUnit:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class VInt:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class VBool:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class VLoc:
    loc: int

    def __str__(self) -> str:
        return f"<loc {self.loc}>"


Value = Union[VUnit, VInt, VBool, VLoc]
UNIT_VALUE = VUnit()


class _Uninit:
    def __repr__(self) -> str:
        return "<uninitialized>"


UNINITIALIZED = _Uninit()


@dataclass
class Store:
    cells: list = field(default_factory=list)

    @property
    def next_location(self) -> int:
        return len(self.cells)

    def alloc(self, v) -> VLoc:
        self.cells.append(v)
        return VLoc(len(self.cells) - 1)

    def read(self, loc: VLoc) -> Value:
        if not isinstance(loc, VLoc) or not 0 <= loc.loc < len(self.cells):
            raise EvalError(f"read of invalid location {loc!r}")
        v = self.cells[loc.loc]
        if v is UNINITIALIZED:
            raise EvalError(f"read of uninitialized location {loc.loc}")
        return v

    def write(self, loc: VLoc, v: Value) -> None:
        if not isinstance(loc, VLoc) or not 0 <= loc.loc < len(self.cells):
            raise EvalError(f"write to invalid location {loc!r}")
        self.cells[loc.loc] = v

    def copy(self) -> Store:
        return Store(list(self.cells))

    def __getitem__(self, loc: int) -> Value:
        return self.cells[loc]


@dataclass(frozen=True)
class EvalResult:
    value: Value
    final_store: Store
    steps: int


def literal_value(name: str) -> Value:
    if name.isdigit():
        return VInt(int(name))
    if name == "true":
        return VBool(True)
    if name == "false":
        return VBool(False)
    if name == "()":
        return UNIT_VALUE
    raise EvalError(f"unknown constant {name}")


class _Machine:
    def __init__(self, store: Store | None, max_steps: int):
        self.store = Store() if store is None else store.copy()
        self.steps = 0
        self.max_steps = max_steps

    def tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise EvalError(f"step limit {self.max_steps} exceeded")

    def result(self, v: Value) -> EvalResult:
        return EvalResult(v, self.store, self.steps)

    def add(self, a: Value, b: Value) -> Value:
        if not (isinstance(a, VInt) and isinstance(b, VInt)):
            raise EvalError(f"+ applied to {a!r}, {b!r}")
        return VInt(a.value + b.value)

    def incr(self, loc: Value) -> Value:
        old = self.store.read(loc)
        if not isinstance(old, VInt):
            raise EvalError(f"incr of non-integer cell {old!r}")
        self.store.write(loc, VInt(old.value + 1))
        return UNIT_VALUE


# ---------------------------------------------------------------------------
# ICaml


def eval_icaml(e: ic.IExpr, env: Mapping[str, Value] | None = None,
               store: Store | None = None, max_steps: int = DEFAULT_MAX_STEPS) -> EvalResult:
    m = _Machine(store, max_steps)
    v = _eval_i(m, e, dict(env or {}))
    return m.result(v)


def _eval_i(m: _Machine, e, env: dict) -> Value:
    m.tick()
    if isinstance(e, ic.Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name}") from None
    if isinstance(e, ic.Const):
        return literal_value(e.name)
    if isinstance(e, ic.App1):
        v = _eval_i(m, e.arg, env)
        if e.op == "ref":
            return m.store.alloc(v)
        if e.op == "!":
            return m.store.read(v)
        if e.op == "incr":
            return m.incr(v)
        raise EvalError(f"unknown constant {e.op}")
    if isinstance(e, ic.App2):
        a = _eval_i(m, e.left, env)
        b = _eval_i(m, e.right, env)
        if e.op == "+":
            return m.add(a, b)
        if e.op == ":=":
            m.store.write(a, b)
            return UNIT_VALUE
        raise EvalError(f"unknown constant {e.op}")
    if isinstance(e, ic.Seq):
        _eval_i(m, e.first, env)
        return _eval_i(m, e.second, env)
    if isinstance(e, ic.Let):
        v = _eval_i(m, e.rhs, env)
        return _eval_i(m, e.body, {**env, e.name: v})
    raise EvalError(f"not an ICaml expression: {e!r}")


# ---------------------------------------------------------------------------
# CoreC / CoreCE


@dataclass(frozen=True)
class ArrayCell:
    """Environment entry for ``t z[1]``: the name evaluates to the address."""

    loc: VLoc


def eval_corec(e: cc.CExpr, env: Mapping | None = None, store: Store | None = None,
               max_steps: int = DEFAULT_MAX_STEPS) -> EvalResult:
    """Evaluate CoreC.  ``env`` maps variable names to their locations."""
    return _eval_c(e, env, store, max_steps, cc.Mode.COREC)


def eval_corece(e: cc.CExpr, env: Mapping | None = None, store: Store | None = None,
                max_steps: int = DEFAULT_MAX_STEPS) -> EvalResult:
    """Evaluate CoreCE.  ``env`` maps variable names to their locations."""
    return _eval_c(e, env, store, max_steps, cc.Mode.CORECE)


def eval_c(e: cc.CExpr, mode: cc.Mode, env: Mapping | None = None,
           store: Store | None = None, max_steps: int = DEFAULT_MAX_STEPS) -> EvalResult:
    return _eval_c(e, env, store, max_steps, mode)


def _eval_c(e, env, store, max_steps, mode) -> EvalResult:
    m = _Machine(store, max_steps)
    v = _CEval(m, mode).eval(e, dict(env or {}))
    return m.result(v)


class _CEval:
    def __init__(self, m: _Machine, mode: cc.Mode):
        self.m = m
        self.store = m.store
        self.corece = mode is cc.Mode.CORECE

    def lookup(self, env, name):
        try:
            return env[name]
        except KeyError:
            raise EvalError(f"unbound variable {name}") from None

    def eval(self, e, env: dict) -> Value:
        m = self.m
        m.tick()
        if isinstance(e, cc.Var):
            slot = self.lookup(env, e.name)
            if isinstance(slot, ArrayCell):
                return slot.loc
            return self.store.read(slot)
        if isinstance(e, cc.Const):
            return literal_value(e.name)
        if isinstance(e, cc.Seq):
            self.eval(e.first, env)
            return self.eval(e.second, env)
        if isinstance(e, cc.Decl):
            init = UNINITIALIZED if e.init is None else self.eval(e.init, env)
            loc = self.store.alloc(init)
            slot = ArrayCell(loc) if e.binder.is_array else loc
            return self.eval(e.body, {**env, e.name: slot})
        if isinstance(e, cc.App2) and e.op == "+":
            return m.add(self.eval(e.left, env), self.eval(e.right, env))
        if not self.corece:
            if isinstance(e, cc.Assign):
                v = self.eval(e.value, env)
                self.store.write(self.lookup(env, e.name), v)
                return UNIT_VALUE
            raise EvalError(f"not a CoreC expression: {e!r}")
        if isinstance(e, cc.AddrOf):
            slot = self.lookup(env, e.name)
            if isinstance(slot, ArrayCell):
                raise EvalError(f"address of array {e.name}")
            return slot
        if isinstance(e, cc.App1):
            p = self.eval(e.arg, env)
            if e.op == cc.LOAD:
                return self.store.read(p)
            if e.op == "incr":
                return m.incr(p)
        if isinstance(e, cc.App2) and e.op == cc.STORE:
            p = self.eval(e.left, env)
            v = self.eval(e.right, env)
            self.store.write(p, v)
            return UNIT_VALUE
        raise EvalError(f"not a CoreCE expression: {e!r}")
