"""Random well-typed ICaml programs and a shrinker for failing ones.

Generation is type-directed: :func:`generate` is asked for a program of
a given type and builds it top-down, choosing only productions that can
still be completed within the remaining depth.  Programs are closed and
come out fully annotated.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Iterator
from dataclasses import dataclass, replace

from . import icaml as ic
from .base import BOOL, INT, UNIT
from .diagnostics import TypeCheckError
from .icaml import App1, App2, Const, IType, Let, Ref, Seq, Var

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GenConfig:
    max_depth: int = 8
    target_type: IType = INT
    alias_bias: float = 0.3
    seed: int = 0
    include_nested_refs: bool = True
    include_incr: bool = True
    max_ref_depth: int = 3
    # Probability weight of ``ref e`` outside ``let x = ref e``; zero keeps
    # every allocation in the shape the final translation maps to a variable.
    bare_ref_rate: float = 0.0
    max_literal: int = 99

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not 0.0 <= self.alias_bias <= 1.0:
            raise ValueError("alias_bias must lie in [0, 1]")
        if ic.ref_depth(self.target_type) > self.ref_limit:
            raise ValueError(f"target type {self.target_type} is nested too deeply")

    @property
    def ref_limit(self) -> int:
        return self.max_ref_depth if self.include_nested_refs else 1


def derive_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th program of a run, stable across platforms."""
    x = (seed * 0x9E3779B97F4A7C15 + index * 0xBF58476D1CE4E5B9 + 1) & _MASK64
    x ^= x >> 31
    return (x * 0x94D049BB133111EB) & _MASK64


def generate(cfg: GenConfig) -> ic.IExpr:
    g = _Generator(cfg)
    if not g.feasible(cfg.target_type, cfg.max_depth, {}):
        raise ValueError(f"no closed program of type {cfg.target_type} "
                         f"fits in depth {cfg.max_depth}")
    return g.gen(cfg.target_type, cfg.max_depth, {})


def _base_weight(t) -> float:
    return {INT: 5.0, BOOL: 2.0, UNIT: 1.0}[t]


class _Generator:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.counter = 0
        self.bare = cfg.bare_ref_rate > 0
        self._min_depth: dict = {}
        self.universe = []
        for base in (INT, BOOL, UNIT):
            t, w = base, _base_weight(base)
            for _ in range(cfg.ref_limit + 1):
                self.universe.append((t, w))
                t, w = Ref(t), w * 0.4

    # -- feasibility -------------------------------------------------------

    def min_depth(self, t) -> int:
        # ``ref e`` costs one level; without bare refs a ref-typed value is
        # built as ``let x = ref e in x``, which costs two.
        d = self._min_depth.get(t)
        if d is None:
            d = self.min_depth(t.inner) + (1 if self.bare else 2) if isinstance(t, Ref) else 1
            self._min_depth[t] = d
        return d

    def feasible(self, t, d: int, scope: dict) -> bool:
        if d < 1:
            return False
        return d >= self.min_depth(t) or t in scope.values()

    def pick_type(self, d: int, scope: dict, allow=lambda t: True):
        opts = [(t, w) for t, w in self.universe if allow(t) and self.feasible(t, d, scope)]
        if not opts:
            return None
        types, weights = zip(*opts)
        return self.rng.choices(types, weights)[0]

    # -- leaves ------------------------------------------------------------

    def literal(self, t) -> ic.IExpr | None:
        if t == INT:
            return Const(str(self.rng.randint(0, self.cfg.max_literal)), ty=INT)
        if t == BOOL:
            return Const(self.rng.choice(("true", "false")), ty=BOOL)
        if t == UNIT:
            return Const("()", ty=UNIT)
        return None

    def leaf(self, t, scope: dict) -> ic.IExpr | None:
        names = [n for n, v in scope.items() if v == t]
        lit = self.literal(t)
        if names and (lit is None or self.rng.random() < 0.7):
            return Var(self.rng.choice(names), ty=t)
        return lit

    def fresh(self, scope: dict) -> str:
        if scope and self.rng.random() < 0.08:
            return self.rng.choice(list(scope))  # shadowing
        self.counter += 1
        return f"x{self.counter}"

    # -- productions -------------------------------------------------------

    def gen(self, t, d: int, scope: dict) -> ic.IExpr:
        if isinstance(t, Ref):
            # cells are mostly reached through a variable, as in real code
            p_leaf = 0.6 if t in scope.values() else 0.0
        else:
            p_leaf = 0.15
        if d == 1 or self.rng.random() < p_leaf:
            e = self.leaf(t, scope)
            if e is not None:
                return e
        prods = self.productions(t, d, scope)
        if not prods:
            return self.leaf(t, scope)
        fns, weights = zip(*prods)
        return self.rng.choices(fns, weights)[0](t, d, scope)

    def productions(self, t, d: int, scope: dict) -> list:
        cfg = self.cfg
        out = []
        if self.feasible(t, d - 1, scope) or (
                isinstance(t, Ref) and self.feasible(t.inner, d - 2, scope)):
            out.append((self.let, 3.0))
        if self.feasible(t, d - 1, scope):
            out.append((self.seq, 2.0))
        if ic.ref_depth(t) < cfg.ref_limit and self.feasible(Ref(t), d - 1, scope):
            out.append((self.deref, 2.0 if self.has_var(Ref(t), scope) else 0.5))
        if t == INT:
            out.append((self.plus, 3.0))
        if t == UNIT:
            if self.pick_cell_type(d, scope) is not None:
                out.append((self.assign, 4.0))
            if cfg.include_incr and self.feasible(Ref(INT), d - 1, scope):
                out.append((self.incr, 1.0 if self.has_var(Ref(INT), scope) else 0.25))
        if isinstance(t, Ref) and self.bare and self.feasible(t.inner, d - 1, scope):
            out.append((self.bare_ref, 10.0 * cfg.bare_ref_rate))
        return out

    @staticmethod
    def has_var(t, scope: dict) -> bool:
        return t in scope.values()

    def pick_cell_type(self, d: int, scope: dict):
        limit = self.cfg.ref_limit
        cells = [v.inner for v in scope.values() if isinstance(v, Ref)
                 and self.feasible(v.inner, d - 1, scope) and d >= 2]
        if cells and self.rng.random() < 0.8:
            return self.rng.choice(cells)
        return self.pick_type(d - 1, scope, lambda t: ic.ref_depth(t) < limit
                              and self.feasible(Ref(t), d - 1, scope))

    def let(self, t, d: int, scope: dict) -> ic.IExpr:
        rng, cfg = self.rng, self.cfg
        refs = [n for n, v in scope.items() if isinstance(v, Ref)]
        name = self.fresh(scope)
        must_bind_t = not self.feasible(t, d - 1, scope)
        if must_bind_t:
            # only a binding of type t can make the body possible
            rhs = self.binding_ref(t.inner, d, scope)
        elif refs and rng.random() < cfg.alias_bias:
            alias = rng.choice(refs)
            rhs = Var(alias, ty=scope[alias])
        elif d >= 3 and rng.random() < 0.5:
            inner = self.pick_type(d - 2, scope, lambda u: ic.ref_depth(u) < cfg.ref_limit)
            rhs = self.binding_ref(inner, d, scope)
        else:
            rhs = self.gen(self.pick_type(d - 1, scope), d - 1, scope)
        inner_scope = {**scope, name: rhs.ty}
        if not self.feasible(t, d - 1, inner_scope):
            # shadowing hid the only variable of type t; bind a fresh name instead
            self.counter += 1
            name = f"x{self.counter}"
            inner_scope = {**scope, name: rhs.ty}
        body = self.gen(t, d - 1, inner_scope)
        return Let(name, rhs, body, ty=body.ty)

    def binding_ref(self, inner, d: int, scope: dict) -> ic.IExpr:
        e = self.gen(inner, d - 2, scope)
        return App1("ref", e, ty=Ref(inner))

    def seq(self, t, d: int, scope: dict) -> ic.IExpr:
        first_t = UNIT if self.rng.random() < 0.6 else self.pick_type(d - 1, scope)
        first = self.gen(first_t, d - 1, scope)
        second = self.gen(t, d - 1, scope)
        return Seq(first, second, ty=t)

    def deref(self, t, d: int, scope: dict) -> ic.IExpr:
        return App1("!", self.gen(Ref(t), d - 1, scope), ty=t)

    def plus(self, t, d: int, scope: dict) -> ic.IExpr:
        return App2("+", self.gen(INT, d - 1, scope), self.gen(INT, d - 1, scope), ty=INT)

    def assign(self, t, d: int, scope: dict) -> ic.IExpr:
        cell = self.pick_cell_type(d, scope)
        target = self.gen(Ref(cell), d - 1, scope)
        value = self.gen(cell, d - 1, scope)
        return App2(":=", target, value, ty=UNIT)

    def incr(self, t, d: int, scope: dict) -> ic.IExpr:
        return App1("incr", self.gen(Ref(INT), d - 1, scope), ty=UNIT)

    def bare_ref(self, t, d: int, scope: dict) -> ic.IExpr:
        return App1("ref", self.gen(t.inner, d - 1, scope), ty=t)


def depth(e: ic.IExpr) -> int:
    return 1 + max((depth(k) for k in ic.children(e)), default=0)


def has_alias_let(e: ic.IExpr) -> bool:
    """Does ``e`` bind a reference-typed value with a plain ``let``?"""
    return any(isinstance(n, Let) and isinstance(n.rhs.ty, Ref) and not ic.is_binding_ref(n)
               for n in ic.walk(e))


# ---------------------------------------------------------------------------
# Shrinking


def shrink(e: ic.IExpr, failing: Callable[[ic.IExpr], bool],
           max_attempts: int = 100_000) -> ic.IExpr:
    """Greedily minimise ``e`` while ``failing`` keeps holding.

    Candidates replace one subterm by a same-typed child, by a minimal
    same-typed term, drop an unused ``let``, or shrink an integer literal.
    Every accepted candidate typechecks at the original type and is
    strictly smaller in (node count, sum of literals).
    """
    best = e
    attempts = 0
    progress = True
    while progress and attempts < max_attempts:
        progress = False
        for cand in _candidates(best, {}):
            attempts += 1
            if _measure(cand) >= _measure(best):
                continue
            try:
                cand = ic.typecheck_icaml(ic.strip_types(cand))
            except TypeCheckError:
                continue
            if cand.ty == e.ty and failing(cand):
                best, progress = cand, True
                break
            if attempts >= max_attempts:
                break
    return best


def _measure(e: ic.IExpr) -> tuple[int, int]:
    lits = sum(int(n.name) for n in ic.walk(e) if isinstance(n, Const) and n.name.isdigit())
    return ic.size(e), lits


def _minimal(t, scope: dict) -> list[ic.IExpr]:
    if t == INT:
        return [Const("0", ty=INT)]
    if t == BOOL:
        return [Const("false", ty=BOOL)]
    if t == UNIT:
        return [Const("()", ty=UNIT)]
    return [Var(n, ty=t) for n, v in scope.items() if v == t]


def _candidates(e: ic.IExpr, scope: dict) -> Iterator[ic.IExpr]:
    for m in _minimal(e.ty, scope):
        if m != e:
            yield m
    for k in ic.children(e):
        if k.ty == e.ty:
            yield k
    if isinstance(e, Let) and e.name not in ic.free_vars(e.body):
        yield e.body
    if isinstance(e, Seq):
        yield e.second
    if isinstance(e, Const) and e.name.isdigit():
        n = int(e.name)
        for smaller in dict.fromkeys((0, n // 2, n - 1)):
            if 0 <= smaller < n:
                yield replace(e, name=str(smaller))
    kids = ic.children(e)
    for i, k in enumerate(kids):
        inner = {**scope, e.name: e.rhs.ty} if isinstance(e, Let) and i == 1 else scope
        for c in _candidates(k, inner):
            yield ic.with_children(e, kids[:i] + (c,) + kids[i + 1:])
