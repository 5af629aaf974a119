from offshore import icaml as ic
from offshore.difftest import (AGREE, DISAGREE, REJECTED, check_program, corpus,
                               program_config, run_difftest)
from offshore.pipeline import load
from offshore.semantics import VInt
from offshore.translate import RefPolicy, Strategy

from conftest import EQ1


def test_check_program_outcomes():
    e = load(EQ1)
    assert check_program(e, "final").kind == AGREE
    assert check_program(e, "ptr-array").kind == AGREE
    o = check_program(e, "naive")
    assert o.kind == DISAGREE and o.expected == VInt(42) and o.actual == VInt(1)
    o = check_program(e, "extant")
    assert o.kind == REJECTED and o.detail == "ref-let"


def test_bare_ref_rejected_or_allocated():
    e = load("!(ref 4) + 1")
    assert check_program(e, "final").kind == REJECTED
    assert check_program(e, "final", RefPolicy.ALLOCA).kind == AGREE


def test_runs_are_reproducible():
    a = list(corpus(20, seed=9))
    b = list(corpus(20, seed=9))
    assert a == b
    assert program_config(9, 3) == program_config(9, 3)


def test_report_counts_add_up():
    r = run_difftest(60, seed=2, strategies=["final", "extant", "naive"])
    for s in r.strategies.values():
        assert s.agree + s.disagree + s.rejected == 60
    assert r.summary() == f"agree={r.agree} disagree={r.disagree} rejected={r.rejected}"
    assert r.strategies[Strategy.FINAL].agree == 60


def test_naive_counterexample_is_found_and_shrunk():
    r = run_difftest(800, seed=1, strategies=["naive"])
    rep = r.strategies[Strategy.NAIVE]
    assert rep.disagree >= 1 and rep.alias_disagree == rep.disagree
    cx = rep.counterexamples[0]
    assert cx.outcome.kind == DISAGREE
    assert ic.size(cx.shrunk) < ic.size(cx.program)


def test_parallel_matches_serial():
    kw = dict(seed=5, strategies=["final", "extant"], shrink_failures=False)
    a = run_difftest(40, jobs=1, **kw)
    b = run_difftest(40, jobs=2, **kw)
    for s in a.strategies:
        x, y = a.strategies[s], b.strategies[s]
        assert (x.agree, x.disagree, x.rejected, x.reasons) == \
               (y.agree, y.disagree, y.rejected, y.reasons)
