"""Rendering lifted CoreC/CoreCE trees as C99, and running the result.

Surface conventions:

* ``p ← v`` prints as ``*p = v``; ``*&x`` prints as ``x`` (and ``&x ← v``
  as ``x = v``) unless ``abbreviate=False``.
* ``const`` binders print as ``const int x`` or ``int * const p``.
* ``t z[1]`` binders print with an aggregate initializer ``{e}``.
* Sequencing in expression position uses the comma operator.
* ``unit`` is represented by ``int`` (value irrelevant, ``0`` when one
  must be produced), since ``void`` objects cannot exist in C.

C leaves the evaluation order of the operands of ``+`` and ``=``
unspecified, whereas the calculi evaluate left to right.  Before
printing, an operand pair where one side has side effects the other may
observe is sequenced through a temporary: ``e1 + e2`` becomes
``(t = e1, t + e2)``.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import corecalc as cc
from .base import BOOL, Base, Unit, rebuild
from .corecalc import BinderType, Mode, Ptr
from .diagnostics import UnliftedDeclaration
from .translate import FreshNames, all_names, is_lifted

C_FLAGS = ("-std=c99", "-Wall", "-Werror")

C_RESERVED = frozenset("""
    auto break case char const continue default do double else enum extern float for
    goto if inline int long register restrict return short signed sizeof static struct
    switch typedef union unsigned void volatile while _Bool _Complex _Imaginary
    bool true false main printf
""".split())


@dataclass
class CSourceUnit:
    includes: list[str]
    body: str
    result_print_format: str  # "int", "bool" or "unit"
    result: str | None = None

    @property
    def text(self) -> str:
        """Body statements followed by the result expression, if any."""
        if self.result is None:
            return self.body
        return f"{self.body}\n{self.result}" if self.body else self.result


def c_type(t) -> str:
    if isinstance(t, Unit):
        return "int"
    if isinstance(t, Base):
        return t.name
    if isinstance(t, Ptr):
        return f"{c_type(t.inner)} *"
    raise TypeError(f"not a C type: {t!r}")


def c_declarator(b: BinderType, name: str) -> str:
    if b.is_array:
        return f"{c_type(b.base)} {name}[1]"
    if b.is_const:
        if isinstance(b.base, Ptr):
            return f"{c_type(b.base)} const {name}"
        return f"const {c_type(b.base)} {name}"
    return f"{c_type(b.base)} {name}"


# ---------------------------------------------------------------------------
# Operand sequencing


def sequence_operands(e: cc.CExpr, mode: Mode) -> cc.CExpr:
    """Make every left-to-right dependency explicit with comma sequencing.

    Expects a lifted tree and returns a lifted tree; new temporaries are
    declared (uninitialized) at the top.
    """
    s = _Sequencer(e, mode)
    out = s.go(e)
    for name, t in reversed(s.temps):
        out = cc.Decl(BinderType(t), name, None, out, ty=out.ty)
    return out


class _Sequencer:
    def __init__(self, e: cc.CExpr, mode: Mode):
        self.mode = mode
        self.fresh = FreshNames(all_names(e), prefix="t")
        self.temps: list[tuple[str, object]] = []
        self.saved: dict[str, set] = {}  # temporaries holding a store's address
        self.arrays = {n.name for n in cc.walk(e) if isinstance(n, cc.Decl) and n.binder.is_array}
        # cells a pointer variable may point to: those whose address is used
        # other than as the immediate operand of a load, store or incr
        direct = set()
        for n in cc.walk(e):
            if isinstance(n, cc.App1) and n.op in (cc.LOAD, "incr"):
                direct.add(id(n.arg))
            elif isinstance(n, cc.App2) and n.op == cc.STORE:
                direct.add(id(n.left))
        self.escaped = frozenset(
            n.name for n in cc.walk(e) if id(n) not in direct and (
                isinstance(n, cc.AddrOf) or (isinstance(n, cc.Var) and n.name in self.arrays)))

    def cell(self, addr) -> set:
        """The cells ``addr`` may point to."""
        if isinstance(addr, cc.AddrOf):
            return {addr.name}
        if isinstance(addr, cc.Var) and addr.name in self.arrays:
            return {addr.name}
        if isinstance(addr, cc.Var) and addr.name in self.saved:
            return set(self.saved[addr.name])
        return set(self.escaped)

    def effects(self, e) -> tuple[set, set]:
        reads, writes = set(), set()
        for n in cc.walk(e):
            if isinstance(n, cc.Var) and n.name not in self.arrays:
                reads.add(n.name)
            elif isinstance(n, (cc.Assign, cc.Decl)):
                writes.add(n.name)
            elif isinstance(n, cc.App1) and n.op == cc.LOAD:
                reads |= self.cell(n.arg)
            elif isinstance(n, cc.App1) and n.op == "incr":
                reads |= self.cell(n.arg)
                writes |= self.cell(n.arg)
            elif isinstance(n, cc.App2) and n.op == cc.STORE:
                writes |= self.cell(n.left)
        return reads, writes

    def conflict(self, e) -> bool:
        """Would C leave a write in one operand unsequenced against the other?"""
        rl, wl = self.effects(e.left)
        rr, wr = self.effects(e.right)
        if e.op == cc.STORE:
            # the store itself happens after both operands; only a second
            # write to the target in the right operand is a problem
            rl = rl | self.cell(e.left)
        return _overlap(wl, rr | wr) or _overlap(wr, rl | wl)

    def go(self, e):
        e = cc.with_children(e, tuple(self.go(k) for k in cc.children(e)))
        if not isinstance(e, cc.App2) or not self.conflict(e):
            return e
        l = e.left
        t = self.fresh()
        self.temps.append((t, l.ty))
        if e.op == cc.STORE:
            self.saved[t] = self.cell(l)
        if self.mode is Mode.COREC:
            save = cc.Assign(t, l, ty=cc.UNIT)
        else:
            save = cc.App2(cc.STORE, cc.AddrOf(t, ty=Ptr(l.ty)), l, ty=cc.UNIT)
        return cc.Seq(save, rebuild(e, left=cc.Var(t, ty=l.ty)), ty=e.ty)


def _overlap(a: set, b: set) -> bool:
    return not a.isdisjoint(b)


# ---------------------------------------------------------------------------
# Rendering

_COMMA, _ASSIGN, _ADD, _PREFIX, _POSTFIX, _PRIMARY = 1, 2, 12, 14, 15, 16


def emit_c(e: cc.CExpr, mode: Mode | None = None, abbreviate: bool = True) -> CSourceUnit:
    """Render a lifted, type-annotated tree as C statements.

    Raises :class:`UnliftedDeclaration` if a declaration is still nested
    inside an expression.
    """
    if not is_lifted(e):
        bad = next(n for n in cc.walk(e) if isinstance(n, cc.Decl))
        raise UnliftedDeclaration("declaration in expression position; lift declarations first",
                                  bad.span)
    if e.ty is None:
        raise ValueError("emit_c needs a type-annotated tree")
    if mode is None:
        mode = Mode.CORECE if cc.uses_corece(e) else Mode.COREC
    e = sequence_operands(e, mode)
    r = _Renderer(abbreviate)
    r.spine(e, True)
    fmt = "unit" if isinstance(e.ty, Unit) else ("bool" if e.ty == BOOL else "int")
    if fmt == "int" and isinstance(e.ty, Ptr):
        raise ValueError("program result must have base or unit type")
    return CSourceUnit(["stdio.h", "stdbool.h"], "\n".join(r.lines()), fmt, r.result)


@dataclass
class _Renderer:
    abbreviate: bool
    stmts: list[str] = field(default_factory=list)
    declared: list[str] = field(default_factory=list)
    reads: set[str] = field(default_factory=set)
    result: str | None = None

    def lines(self) -> list[str]:
        # Every variable is initialized by the end of the spine, so that is
        # where never-read ones are marked used.
        unread = [name for name in self.declared if name not in self.reads]
        return self.stmts + [f"(void){name};" for name in unread]

    def spine(self, e, is_result: bool):
        if isinstance(e, cc.Seq):
            self.spine(e.first, False)
            self.spine(e.second, is_result)
        elif isinstance(e, cc.Decl):
            decl = c_declarator(e.binder, e.name)
            if e.init is not None:
                init = self.value(e.init, _ASSIGN)
                decl += " = {" + init + "}" if e.binder.is_array else f" = {init}"
            self.declared.append(e.name)
            self.stmts.append(decl + ";")
            self.spine(e.body, is_result)
        elif is_result and not isinstance(e.ty, Unit):
            self.result = self.value(e, _ASSIGN)
        elif not (isinstance(e, cc.Const) and e.name == "()"):
            self.stmts.append(self.discard(e)[0] + ";")

    def value(self, e, ctx: int) -> str:
        text, prec = self.render(e, True)
        return f"({text})" if prec < ctx else text

    def discard(self, e) -> tuple[str, int]:
        """Render ``e`` for effect only, silencing unused-value warnings."""
        if isinstance(e, cc.Seq):
            a, _ = self.discard(e.first)
            b, _ = self.discard(e.second)
            return f"{a}, {b}", _COMMA
        if isinstance(e, cc.Const) and e.name == "()":
            return "((void)0)", _PRIMARY
        if isinstance(e, cc.Assign) or (isinstance(e, (cc.App1, cc.App2))
                                        and e.op in (cc.STORE, "incr")):
            return self.render(e, False)
        text, prec = self.render(e, False)
        if prec < _PREFIX:
            text = f"({text})"
        return f"(void){text}", _PREFIX

    def render(self, e, need_value: bool) -> tuple[str, int]:
        if need_value and isinstance(e.ty, Unit) and not isinstance(e, (cc.Const, cc.Var)):
            effect, _ = self.discard(e)
            return f"({effect}, 0)", _PRIMARY
        if isinstance(e, cc.Var):
            self.reads.add(e.name)
            return e.name, _PRIMARY
        if isinstance(e, cc.Const):
            if e.name == "()":
                return ("0", _PRIMARY) if need_value else ("((void)0)", _PRIMARY)
            return e.name, _PRIMARY
        if isinstance(e, cc.AddrOf):
            self.reads.add(e.name)
            return f"&{e.name}", _PREFIX
        if isinstance(e, cc.Assign):
            return f"{e.name} = {self.value(e.value, _ASSIGN)}", _ASSIGN
        if isinstance(e, cc.App1):
            if e.op == cc.LOAD:
                if self.abbreviate and isinstance(e.arg, cc.AddrOf):
                    self.reads.add(e.arg.name)
                    return e.arg.name, _PRIMARY
                return f"*{self.value(e.arg, _PREFIX)}", _PREFIX
            if e.op == "incr":
                if self.abbreviate and isinstance(e.arg, cc.AddrOf):
                    return f"{e.arg.name}++", _POSTFIX
                return f"(*{self.value(e.arg, _PREFIX)})++", _POSTFIX
        if isinstance(e, cc.App2):
            if e.op == "+":
                return f"{self.value(e.left, _ADD)} + {self.value(e.right, _ADD + 1)}", _ADD
            if e.op == cc.STORE:
                rhs = self.value(e.right, _ASSIGN)
                if self.abbreviate and isinstance(e.left, cc.AddrOf):
                    return f"{e.left.name} = {rhs}", _ASSIGN
                return f"*{self.value(e.left, _PREFIX)} = {rhs}", _ASSIGN
        if isinstance(e, cc.Seq):
            a, _ = self.discard(e.first)
            b, _ = self.render(e.second, need_value)
            return f"{a}, {b}", _COMMA
        if isinstance(e, cc.Decl):
            raise UnliftedDeclaration("declaration in expression position", e.span)
        raise TypeError(f"cannot render {e!r}")


def wrap_main(u: CSourceUnit) -> str:
    """A complete translation unit printing the program's result."""
    lines = [f"#include <{h}>" for h in u.includes]
    lines += ["", "int main(void)", "{"]
    lines += [f"    {s}" for s in u.body.splitlines() if s]
    if u.result_print_format == "unit":
        if u.result is not None:
            lines.append(f"    (void)({u.result});")
        lines.append('    printf("()\\n");')
    elif u.result_print_format == "bool":
        lines.append(f'    printf("%d\\n", (int)({u.result}));')
    else:
        lines.append(f'    printf("%d\\n", {u.result});')
    lines += ["    return 0;", "}", ""]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Compile and run


class CompilerNotFound(RuntimeError):
    pass


class CompileError(RuntimeError):
    def __init__(self, message: str, source: str):
        super().__init__(message)
        self.source = source


def find_compiler() -> list[str] | None:
    """The C compiler command from ``$CC`` (default ``cc``), or None if absent."""
    cmd = shlex.split(os.environ.get("CC", "cc")) or ["cc"]
    if shutil.which(cmd[0]) is None:
        return None
    return cmd


def compile_and_run(source: str, compiler: list[str] | None = None, timeout: float = 30) -> str:
    """Compile ``source`` with the C99 warning-free flags, run it, return stdout."""
    compiler = compiler or find_compiler()
    if compiler is None:
        raise CompilerNotFound("no C compiler found (set CC)")
    with tempfile.TemporaryDirectory(prefix="offshore-") as tmp:
        src = Path(tmp, "prog.c")
        exe = Path(tmp, "prog")
        src.write_text(source, encoding="utf-8")
        proc = subprocess.run([*compiler, *C_FLAGS, "-o", str(exe), str(src)],
                              capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0:
            raise CompileError(proc.stderr.strip(), source)
        run = subprocess.run([str(exe)], capture_output=True, text=True, timeout=timeout)
        if run.returncode != 0:
            raise RuntimeError(f"program exited with status {run.returncode}")
        return run.stdout
