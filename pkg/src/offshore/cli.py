"""Command-line front end.

Exit codes: 0 success, 1 diagnostic, 2 divergence found, 3 environment
failure (no C compiler).  Diagnostics go to stderr as one line each,
``KIND:LINE:COL:MESSAGE``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import corecalc as cc
from . import icaml as ic
from .diagnostics import Diagnostic
from .difftest import run_difftest
from .emit import CompileError, CompilerNotFound, compile_and_run, find_compiler, wrap_main
from .pipeline import c_format, compile_icaml, emit, load, run_target
from .semantics import eval_icaml
from .syntax import show
from .translate import RefPolicy, Strategy

EXIT_OK, EXIT_DIAGNOSTIC, EXIT_DIVERGENCE, EXIT_ENVIRONMENT = 0, 1, 2, 3

STRATEGIES = [s.value for s in Strategy]


class _Fail(Exception):
    def __init__(self, code: int, line: str):
        super().__init__(line)
        self.code = code
        self.line = line


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise _Fail(EXIT_DIAGNOSTIC, f"IOError:0:0:{path}: {err.strerror}") from None


def _program(args) -> ic.IExpr:
    return load(_read(args.file))


def _compiled(args, e: ic.IExpr, lift: bool = True):
    return compile_icaml(e, args.strategy, lift=lift, ref_policy=args.ref_policy)


def cmd_check(args, out) -> int:
    print(_program(args).ty, file=out)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    e = _program(args)
    if args.strategy is None:
        print(eval_icaml(e).value, file=out)
        return EXIT_OK
    print(run_target(_compiled(args, e)).value, file=out)
    return EXIT_OK


def cmd_translate(args, out) -> int:
    c = _compiled(args, _program(args), lift=not args.no_lift)
    print(cc.show(c.target), file=out)
    return EXIT_OK


def cmd_emit(args, out) -> int:
    c = _compiled(args, _program(args))
    unit = emit(c, abbreviate=not args.keep_staraddr)
    text = wrap_main(unit) if args.main else unit.text + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_cc_run(args, out) -> int:
    compiler = find_compiler()
    if compiler is None:
        raise _Fail(EXIT_ENVIRONMENT, f"EnvironmentError:0:0:no C compiler "
                                      f"(tried {os.environ.get('CC', 'cc')!r}; set CC)")
    e = _program(args)
    c = _compiled(args, e)
    expected = c_format(eval_icaml(e).value)
    try:
        got = compile_and_run(wrap_main(emit(c)), compiler).strip()
    except CompilerNotFound as err:
        raise _Fail(EXIT_ENVIRONMENT, f"EnvironmentError:0:0:{err}") from None
    except CompileError as err:
        first = str(err).splitlines()[0] if str(err) else "compilation failed"
        raise _Fail(EXIT_DIAGNOSTIC, f"CompileError:0:0:{first}") from None
    print(f"interpreter: {expected}", file=out)
    print(f"binary: {got}", file=out)
    return EXIT_OK if got == expected else EXIT_DIVERGENCE


def cmd_difftest(args, out) -> int:
    try:
        strategies = [Strategy(s.strip()) for s in args.strategies.split(",") if s.strip()]
    except ValueError as err:
        raise _Fail(EXIT_DIAGNOSTIC, f"UsageError:0:0:{err}") from None
    report = run_difftest(args.count, seed=args.seed, depth=args.depth, strategies=strategies,
                          alias_bias=args.alias_bias, ref_policy=args.ref_policy,
                          bare_ref_rate=args.bare_refs, jobs=args.jobs)
    for r in report.strategies.values():
        reasons = ", ".join(f"{k}={v}" for k, v in sorted(r.reasons.items()))
        print(r.line() + (f" ({reasons})" if reasons else ""), file=out)
        for cx in r.counterexamples:
            o = cx.outcome
            print(f"counterexample for {r.strategy.value} (program {cx.index}):", file=out)
            print(f"  {show(cx.shrunk)}", file=out)
            got = "" if o.actual is None else f", got {o.actual}"
            print(f"  expected {o.expected}{got}: {o.detail}", file=out)
    print(report.summary(), file=out)
    return EXIT_DIVERGENCE if report.disagree else EXIT_OK


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="offshore",
                                description="Translate a small ML with references to C.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(sp):
        sp.add_argument("file", metavar="FILE", help="source file, or - for stdin")

    def with_strategy(sp, default=Strategy.FINAL.value, required=False):
        sp.add_argument("--strategy", choices=STRATEGIES, default=default, required=required)
        sp.add_argument("--ref-policy", choices=[r.value for r in RefPolicy],
                        default=RefPolicy.STRICT.value,
                        help="final strategy: reject or stack-allocate a ref outside let x = ref e")

    sp = sub.add_parser("check", help="typecheck and print the program's type")
    with_file(sp)
    sp.set_defaults(run=cmd_check)

    sp = sub.add_parser("eval", help="evaluate and print the result")
    with_strategy(sp, default=None)
    with_file(sp)
    sp.set_defaults(run=cmd_eval)

    sp = sub.add_parser("translate", help="print the target-calculus program")
    with_strategy(sp, default=None, required=True)
    sp.add_argument("--no-lift", action="store_true", help="skip declaration lifting")
    with_file(sp)
    sp.set_defaults(run=cmd_translate)

    sp = sub.add_parser("emit", help="print or write C")
    with_strategy(sp)
    sp.add_argument("-o", "--output", metavar="FILE.c")
    sp.add_argument("--keep-staraddr", action="store_true",
                    help="do not abbreviate *&x to x")
    sp.add_argument("--main", action="store_true",
                    help="wrap the statements in a main that prints the result")
    with_file(sp)
    sp.set_defaults(run=cmd_emit)

    sp = sub.add_parser("cc-run", help="compile with $CC, run, compare with the interpreter")
    with_strategy(sp)
    with_file(sp)
    sp.set_defaults(run=cmd_cc_run)

    sp = sub.add_parser("difftest", help="differential testing on random programs")
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--strategies", default=Strategy.FINAL.value,
                    help="comma-separated list, e.g. final,ptr-array")
    sp.add_argument("--alias-bias", type=_unit_interval, default=0.3)
    sp.add_argument("--bare-refs", type=_unit_interval, default=0.0,
                    help="weight of ref outside let x = ref e in generated programs")
    sp.add_argument("--ref-policy", choices=[r.value for r in RefPolicy],
                    default=RefPolicy.STRICT.value)
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp.set_defaults(run=cmd_difftest)
    return p


def run_command(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_DIAGNOSTIC if exc.code else EXIT_OK
    try:
        return args.run(args, out)
    except Diagnostic as d:
        print(d.format(), file=err)
        return EXIT_DIAGNOSTIC
    except _Fail as f:
        print(f.line, file=err)
        return f.code


def main() -> None:
    sys.exit(run_command())
