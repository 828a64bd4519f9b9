"""Brute-force backend: search every assignment inside :class:`DomainBounds`.

Symbols that no conjunct defines are enumerated in name order. A symbol
fixed by a top-level conjunct ``s == e`` is computed from ``e`` as soon as
the symbols of ``e`` have values rather than enumerated, and each conjunct
is checked as soon as all of its symbols have values. Both are pure pruning: the set of models is the one naive
enumeration would find.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from ..terms import (
    App, Binary, Expr, MapSort, USort, Var, conjuncts, free_vars, functions_used, walk,
)
from .base import SolverVerdict
from .values import DomainBounds, Domains, FunctionValue, Model, compile_expr

# symbols whose domain is larger than this are not enumerated
MAX_DOMAIN = 2_000_000


@dataclass
class _Plan:
    order: list[str]
    # per position: compiled definition or None (enumerate)
    defs: list
    # per position: compiled conjuncts that become checkable there
    checks: list[list]
    upfront: list
    sorts: dict[str, object]


class FiniteBackend:
    name = "finite"

    def __init__(self, bounds: DomainBounds | None = None):
        self.bounds = bounds or DomainBounds()

    def describe(self) -> str:
        return f"finite ({self.bounds.describe()})"

    def check(self, task, timeout: float = 10.0) -> SolverVerdict:
        return solve(task.query, self.bounds, task.decode, timeout)


def solve(query: Expr, bounds: DomainBounds, decode=None, timeout: float = 10.0) -> SolverVerdict:
    domains = Domains(bounds)
    parts = conjuncts(query)
    sorts: dict[str, object] = dict(free_vars(query))
    fsigs: dict[str, tuple] = {}
    for node in _apps(query):
        fsigs[node.func] = (tuple(a.sort for a in node.args), node.sort)
    if decode:
        for name, entry in decode.items():
            if entry.kind == "function":
                fsigs[name] = (entry.arg_sorts, entry.sort)
    plan = _make_plan(parts, sorts, fsigs, domains)

    env: dict = {}
    for c in plan.upfront:
        if not c(env):
            return SolverVerdict.unsat(backend="finite")

    candidates = []
    for i, sym in enumerate(plan.order):
        if plan.defs[i] is not None:
            candidates.append(None)
            continue
        if sym in fsigs:
            try:
                vals = _function_tables(fsigs[sym], domains)
            except OverflowError:
                return SolverVerdict.unknown("incompleteness", backend="finite")
        else:
            sort = plan.sorts[sym]
            if domains.size(sort) > MAX_DOMAIN:
                return SolverVerdict.unknown("incompleteness", backend="finite")
            vals = domains.values(sort)
        candidates.append(vals)

    deadline = time.monotonic() + timeout
    counter = [0]
    n = len(plan.order)

    def search(i: int) -> bool:
        if i == n:
            return True
        sym = plan.order[i]
        d = plan.defs[i]
        if d is not None:
            v = d(env)
            if not domains.contains(plan.sorts[sym], v):
                return False
            options = (v,)
        else:
            options = candidates[i]
        checks = plan.checks[i]
        for v in options:
            counter[0] += 1
            if counter[0] & 0x3FF == 0 and time.monotonic() > deadline:
                raise TimeoutError
            env[sym] = v
            if all(c(env) for c in checks) and search(i + 1):
                return True
        del env[sym]
        return False

    try:
        found = search(0)
    except TimeoutError:
        return SolverVerdict.unknown("timeout", backend="finite")
    if not found:
        return SolverVerdict.unsat(backend="finite")
    universe = {s.name: domains.cardinality(s.name) for s in _usorts(plan.sorts, fsigs)}
    return SolverVerdict.sat(Model(dict(env), universe, bounded=True), backend="finite")


def _apps(e: Expr):
    return [n for n in walk(e) if isinstance(n, App)]


def _usorts(sorts, fsigs):
    out = set()

    def visit(s):
        if isinstance(s, USort):
            out.add(s)
        elif isinstance(s, MapSort):
            visit(s.key)
            visit(s.value)
    for s in sorts.values():
        visit(s)
    for args, res in fsigs.values():
        for a in args:
            visit(a)
        visit(res)
    return sorted(out, key=lambda s: s.name)


def _function_tables(sig, domains: Domains) -> list[FunctionValue]:
    arg_sorts, result = sig
    rows = list(itertools.product(*[domains.values(s) for s in arg_sorts]))
    vals = domains.values(result)
    if len(vals) ** len(rows) > MAX_DOMAIN:
        raise OverflowError("function table space too large")
    out = []
    for combo in itertools.product(vals, repeat=len(rows)):
        out.append(FunctionValue(combo[0] if combo else vals[0], tuple(zip(rows, combo))))
    return out


def _definition(c: Expr):
    """``(symbol, expr)`` if ``c`` pins a symbol to an expression over others."""
    if not (isinstance(c, Binary) and c.op == "=="):
        return None
    for lhs, rhs in ((c.left, c.right), (c.right, c.left)):
        if isinstance(lhs, Var) and lhs.name not in _syms(rhs):
            return lhs.name, rhs
    return None


def _syms(e: Expr) -> set[str]:
    return set(free_vars(e)) | functions_used(e)


def _make_plan(parts, sorts, fsigs, domains) -> _Plan:
    symbols = sorted(set(sorts) | set(fsigs))
    defs: dict[str, list] = {}
    def_conjuncts = set()
    for idx, c in enumerate(parts):
        d = _definition(c)
        if d is not None and d[0] in sorts:
            defs.setdefault(d[0], []).append((idx, d[1], _syms(d[1])))

    order: list[str] = []
    how: list = []
    placed: set[str] = set()
    remaining = list(symbols)
    while remaining:
        progress = True
        while progress:
            progress = False
            for s in remaining:
                for idx, e, deps in defs.get(s, []):
                    if deps <= placed:
                        order.append(s)
                        how.append(e)
                        def_conjuncts.add(idx)
                        placed.add(s)
                        remaining.remove(s)
                        progress = True
                        break
                if progress:
                    break
        if remaining:
            # enumerate symbols no conjunct defines first, in name order; a
            # definable symbol is enumerated only when nothing else is left
            free = [r for r in remaining if r not in defs]
            s = free[0] if free else remaining[0]
            remaining.remove(s)
            order.append(s)
            how.append(None)
            placed.add(s)

    position = {s: i for i, s in enumerate(order)}
    checks: list[list] = [[] for _ in order]
    upfront = []
    for idx, c in enumerate(parts):
        if idx in def_conjuncts:
            continue
        compiled = compile_expr(c, domains)
        syms = _syms(c)
        if not syms:
            upfront.append(compiled)
        else:
            checks[max(position[s] for s in syms)].append(compiled)
    compiled_defs = [compile_expr(e, domains) if e is not None else None for e in how]
    return _Plan(order, compiled_defs, checks, upfront, sorts)
