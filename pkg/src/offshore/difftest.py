"""Differential testing: generated ICaml programs against their translations.

Each program is evaluated directly and, for every strategy, translated,
lifted, re-typechecked and evaluated in the target calculus.  A run
counts agreements, disagreements and rejections (the translation
refused the program) per strategy and shrinks disagreeing programs.
"""

from __future__ import annotations

import time
from collections import Counter
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import corecalc as cc
from . import icaml as ic
from .base import BOOL, INT, UNIT
from .diagnostics import Diagnostic, EvalError, RestrictionViolation
from .pipeline import compile_icaml
from .semantics import Value, eval_c, eval_icaml
from .testgen import GenConfig, derive_seed, generate, has_alias_let, shrink
from .translate import RefPolicy, Strategy, pointer_type

AGREE, DISAGREE, REJECTED = "agree", "disagree", "rejected"


@dataclass(frozen=True)
class Outcome:
    kind: str
    expected: Value | None = None
    actual: Value | None = None
    detail: str = ""


def check_program(e: ic.IExpr, strategy: Strategy | str,
                  ref_policy: RefPolicy | str = RefPolicy.STRICT,
                  expected: Value | None = None) -> Outcome:
    """Compare ``e`` with its translation under ``strategy``."""
    strategy = Strategy(strategy)
    if expected is None:
        expected = eval_icaml(e).value
    try:
        c = compile_icaml(e, strategy, ref_policy=ref_policy)
    except RestrictionViolation as err:
        return Outcome(REJECTED, expected, detail=err.reason)
    except Diagnostic as err:
        return Outcome(REJECTED, expected, detail=err.kind)
    try:
        checked = cc.typecheck(c.target, c.mode)
    except Diagnostic as err:
        return Outcome(DISAGREE, expected, detail=f"ill-typed output: {err.format()}")
    want_t = pointer_type(e.ty) if strategy.target is cc.Mode.CORECE else e.ty
    if checked.ty != want_t:
        return Outcome(DISAGREE, expected, detail=f"output has type {checked.ty}, not {want_t}")
    try:
        actual = eval_c(c.target, c.mode).value
    except EvalError as err:
        return Outcome(DISAGREE, expected, detail=f"target evaluation failed: {err}")
    if actual != expected:
        return Outcome(DISAGREE, expected, actual, "different result")
    return Outcome(AGREE, expected, actual)


@dataclass
class Counterexample:
    index: int
    seed: int
    program: ic.IExpr
    shrunk: ic.IExpr
    outcome: Outcome


@dataclass
class StrategyReport:
    strategy: Strategy
    agree: int = 0
    disagree: int = 0
    rejected: int = 0
    reasons: Counter = field(default_factory=Counter)
    failures: list[int] = field(default_factory=list)
    counterexamples: list[Counterexample] = field(default_factory=list)
    # disagreements among programs that bind a reference with a plain let
    alias_disagree: int = 0

    def add(self, index: int, o: Outcome, alias: bool) -> None:
        if o.kind == AGREE:
            self.agree += 1
        elif o.kind == REJECTED:
            self.rejected += 1
            self.reasons[o.detail] += 1
        else:
            self.disagree += 1
            self.failures.append(index)
            self.alias_disagree += alias

    def line(self) -> str:
        return (f"{self.strategy.value}: agree={self.agree} disagree={self.disagree} "
                f"rejected={self.rejected}")


@dataclass
class DifftestReport:
    count: int
    seed: int
    depth: int
    alias_bias: float
    strategies: dict[Strategy, StrategyReport]
    alias_programs: int = 0
    elapsed: float = 0.0

    @property
    def agree(self) -> int:
        return sum(r.agree for r in self.strategies.values())

    @property
    def disagree(self) -> int:
        return sum(r.disagree for r in self.strategies.values())

    @property
    def rejected(self) -> int:
        return sum(r.rejected for r in self.strategies.values())

    def summary(self) -> str:
        return f"agree={self.agree} disagree={self.disagree} rejected={self.rejected}"


def program_config(seed: int, index: int, depth: int = 8, alias_bias: float = 0.3,
                   bare_ref_rate: float = 0.0) -> GenConfig:
    """Generator settings of program ``index`` in a run seeded with ``seed``."""
    s = derive_seed(seed, index)
    pick = s % 10
    target = INT if pick < 6 else BOOL if pick < 8 else UNIT
    return GenConfig(max_depth=depth, target_type=target, alias_bias=alias_bias,
                     seed=s >> 4, bare_ref_rate=bare_ref_rate)


def corpus(count: int, seed: int = 0, depth: int = 8, alias_bias: float = 0.3,
           bare_ref_rate: float = 0.0) -> Iterable[ic.IExpr]:
    for i in range(count):
        yield generate(program_config(seed, i, depth, alias_bias, bare_ref_rate))


def _run_chunk(args) -> list[tuple[int, bool, list[Outcome]]]:
    indices, seed, depth, alias_bias, bare, strategies, policy = args
    out = []
    for i in indices:
        e = generate(program_config(seed, i, depth, alias_bias, bare))
        expected = eval_icaml(e).value
        outs = [check_program(e, s, policy, expected) for s in strategies]
        out.append((i, has_alias_let(e), outs))
    return out


def run_difftest(count: int, seed: int = 0, depth: int = 8,
                 strategies: Sequence[Strategy | str] = (Strategy.FINAL,),
                 alias_bias: float = 0.3, ref_policy: RefPolicy | str = RefPolicy.STRICT,
                 bare_ref_rate: float = 0.0, shrink_failures: bool = True,
                 max_counterexamples: int = 3, jobs: int = 1) -> DifftestReport:
    start = time.perf_counter()
    strategies = [Strategy(s) for s in strategies]
    policy = RefPolicy(ref_policy)
    report = DifftestReport(count, seed, depth, alias_bias,
                            {s: StrategyReport(s) for s in strategies})
    jobs = max(1, jobs)
    size = max(1, -(-count // (jobs * 4)))
    chunks = [(range(lo, min(lo + size, count)), seed, depth, alias_bias, bare_ref_rate,
               strategies, policy) for lo in range(0, count, size)]
    if jobs == 1:
        results = map(_run_chunk, chunks)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_run_chunk, chunks)
    try:
        for chunk in results:
            for i, alias, outs in chunk:
                report.alias_programs += alias
                for s, o in zip(strategies, outs):
                    report.strategies[s].add(i, o, alias)
    finally:
        if jobs > 1:
            pool.shutdown()

    if shrink_failures:
        for s, r in report.strategies.items():
            for i in r.failures[:max_counterexamples]:
                cfg = program_config(seed, i, depth, alias_bias, bare_ref_rate)
                e = generate(cfg)
                small = shrink(e, lambda p: check_program(p, s, policy).kind == DISAGREE)
                r.counterexamples.append(
                    Counterexample(i, cfg.seed, e, small, check_program(small, s, policy)))
    report.elapsed = time.perf_counter() - start
    return report
