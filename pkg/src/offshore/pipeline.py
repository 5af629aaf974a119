"""End-to-end helpers: source text or ICaml tree to target tree, C text, results."""

from __future__ import annotations

from dataclasses import dataclass

from . import corecalc as cc
from . import icaml as ic
from .corecalc import Mode
from .emit import C_RESERVED, CSourceUnit, compile_and_run, emit_c, wrap_main
from .semantics import EvalResult, Value, VBool, VInt, VUnit, eval_c, eval_icaml
from .syntax import parse
from .translate import (RefPolicy, Strategy, alpha_rename, is_lifted,
                        lift_declarations, translate)


@dataclass(frozen=True)
class Compiled:
    source: ic.IExpr   # annotated and renamed apart
    target: cc.CExpr
    mode: Mode
    strategy: Strategy


def load(src: str) -> ic.IExpr:
    """Parse and typecheck a closed ICaml program."""
    return ic.typecheck_icaml(parse(src))


def compile_icaml(e: ic.IExpr, strategy: Strategy | str, lift: bool = True,
                  ref_policy: RefPolicy | str = RefPolicy.STRICT) -> Compiled:
    """Translate an annotated ICaml program with the given strategy.

    Binders are renamed apart (and away from C keywords) first, so the
    output can always be lifted and emitted.
    """
    strategy = Strategy(strategy)
    e = alpha_rename(e, avoid=C_RESERVED)
    target = translate(e, strategy, ref_policy=ref_policy)
    if lift:
        target = lift_declarations(target, strategy.target)
    return Compiled(e, target, strategy.target, strategy)


def run_target(c: Compiled) -> EvalResult:
    return eval_c(c.target, c.mode)


def emit(c: Compiled, abbreviate: bool = True) -> CSourceUnit:
    target = c.target if is_lifted(c.target) else lift_declarations(c.target, c.mode)
    return emit_c(target, c.mode, abbreviate=abbreviate)


def c_format(v: Value) -> str:
    """How a compiled program prints ``v``: booleans as 0/1, unit as ``()``."""
    if isinstance(v, VBool):
        return "1" if v.value else "0"
    if isinstance(v, (VInt, VUnit)):
        return str(v)
    raise ValueError(f"cannot print {v} from C")


def cc_run(c: Compiled, compiler: list[str] | None = None) -> str:
    """Emit, compile and run; returns the binary's printed result (stripped)."""
    return compile_and_run(wrap_main(emit(c)), compiler).strip()


def eval_source(e: ic.IExpr) -> Value:
    return eval_icaml(e).value
