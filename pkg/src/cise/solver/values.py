"""Model values, bounded domains and the expression evaluator.

Integers and booleans are plain Python ``int``/``bool``. Elements of
uninterpreted sorts are :class:`Elem`; maps are :class:`MapValue` with a
default and a set of overrides, so bounded and solver-produced maps share one
representation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Union

from ..errors import UnassignedSymbol
from ..terms import (
    App, Binary, BoolLit, BoolSort, Expr, Forall, IntLit, IntSort, MapSort, Old, Select,
    Sort, Store, USort, Unary, Var,
)


@dataclass(frozen=True, order=True)
class Elem:
    sort: str
    index: int

    def __str__(self) -> str:
        return f"elem_{self.sort}_{self.index}"


@dataclass(frozen=True)
class MapValue:
    default: "Value"
    overrides: tuple[tuple["Value", "Value"], ...] = ()
    _table: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        table = dict(self.overrides)
        if len(table) != len(self.overrides):
            raise ValueError("map override keys must be distinct")
        object.__setattr__(self, "_table", table)

    def get(self, key):
        return self._table.get(key, self.default)

    def store(self, key, value) -> "MapValue":
        items = [(k, v) for k, v in self.overrides if k != key]
        if value != self.default:
            items.append((key, value))
        items.sort(key=_value_key)
        return MapValue(self.default, tuple(items))

    def keys(self):
        return self._table.keys()

    def __str__(self) -> str:
        parts = [f"{format_value(k)}: {format_value(v)}" for k, v in self.overrides]
        parts.append(f"default: {format_value(self.default)}")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class FunctionValue:
    """A finite table for an uninterpreted function; missing rows give the default."""
    default: "Value"
    rows: tuple[tuple[tuple, "Value"], ...] = ()
    _table: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_table", dict(self.rows))

    def __call__(self, *args):
        return self._table.get(tuple(args), self.default)


Value = Union[int, bool, Elem, MapValue]


def _value_key(item):
    k = item[0]
    if isinstance(k, Elem):
        return (1, k.sort, k.index)
    return (0, "", int(k))


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


@dataclass(frozen=True)
class DomainBounds:
    """Finite-domain configuration: uninterpreted sort sizes and the integer range."""
    cardinalities: tuple[tuple[str, int], ...] = ()
    default_cardinality: int = 2
    int_lo: int = -4
    int_hi: int = 4

    def __post_init__(self):
        if self.int_lo > self.int_hi:
            raise ValueError("integer range is empty")
        if self.default_cardinality < 1 or any(n < 1 for _, n in self.cardinalities):
            raise ValueError("sort cardinalities must be at least 1")

    @classmethod
    def of(cls, cards: dict[str, int] | None = None, int_range=(-4, 4),
           default_cardinality: int = 2) -> "DomainBounds":
        return cls(tuple(sorted((cards or {}).items())), default_cardinality, *int_range)

    def cardinality(self, sort: str) -> int:
        return dict(self.cardinalities).get(sort, self.default_cardinality)

    def describe(self) -> str:
        parts = [f"int {self.int_lo}..{self.int_hi}"]
        parts += [f"{s}={n}" for s, n in self.cardinalities]
        parts.append(f"other sorts={self.default_cardinality}")
        return ", ".join(parts)


@dataclass
class Model:
    assignments: dict[str, Value]
    # sizes of uninterpreted sorts as seen by the backend that produced the model
    universe: dict[str, int] = field(default_factory=dict)
    # True for models drawn from a bounded enumeration
    bounded: bool = True

    def __getitem__(self, name: str):
        return self.assignments[name]


class Domains:
    """Enumerates bounded sort domains; caches the lists it builds."""

    def __init__(self, bounds: DomainBounds, universe: dict[str, int] | None = None,
                 extra_ints=(), bounded_ints: bool = True):
        self.bounds = bounds
        self.universe = universe or {}
        self.extra_ints = sorted(set(extra_ints))
        # False when values come from an unbounded backend: int-keyed maps then
        # also differ wherever their defaults differ
        self.bounded_ints = bounded_ints
        self._cache: dict[Sort, list] = {}

    def cardinality(self, name: str) -> int:
        if name in self.universe:
            return self.universe[name]
        return self.bounds.cardinality(name)

    def size(self, sort: Sort) -> int:
        if isinstance(sort, IntSort):
            return len(self.values(sort))
        if isinstance(sort, BoolSort):
            return 2
        if isinstance(sort, USort):
            return self.cardinality(sort.name)
        return self.size(sort.value) ** self.size(sort.key)

    def values(self, sort: Sort) -> list:
        got = self._cache.get(sort)
        if got is None:
            got = self._build(sort)
            self._cache[sort] = got
        return got

    def _build(self, sort: Sort) -> list:
        if isinstance(sort, IntSort):
            base = range(self.bounds.int_lo, self.bounds.int_hi + 1)
            return sorted(set(base) | set(self.extra_ints))
        if isinstance(sort, BoolSort):
            return [False, True]
        if isinstance(sort, USort):
            return [Elem(sort.name, i) for i in range(self.cardinality(sort.name))]
        if isinstance(sort, MapSort):
            keys = self.values(sort.key)
            vals = self.values(sort.value)
            return [total_map(keys, combo) for combo in itertools.product(vals, repeat=len(keys))]
        raise TypeError(f"no domain for {sort}")

    def contains(self, sort: Sort, v) -> bool:
        if isinstance(sort, IntSort):
            return isinstance(v, int) and not isinstance(v, bool) and \
                self.bounds.int_lo <= v <= self.bounds.int_hi
        if isinstance(sort, BoolSort):
            return isinstance(v, bool)
        if isinstance(sort, USort):
            return isinstance(v, Elem) and v.sort == sort.name and \
                0 <= v.index < self.cardinality(sort.name)
        if isinstance(sort, MapSort):
            if not isinstance(v, MapValue) or not self.contains(sort.value, v.default):
                return False
            return all(self.contains(sort.key, k) and self.contains(sort.value, x)
                       for k, x in v.overrides)
        return False


def total_map(keys, vals) -> MapValue:
    """A map over ``keys``; the most frequent value becomes the default."""
    counts: dict = {}
    for v in vals:
        counts[v] = counts.get(v, 0) + 1
    # ties go to the value seen first
    default = max(counts, key=lambda v: (counts[v], -list(vals).index(v)))
    overrides = tuple((k, v) for k, v in zip(keys, vals) if v != default)
    return MapValue(default, overrides)


def map_equal(a: MapValue, b: MapValue, sort: MapSort, domains: Domains) -> bool:
    keys = set(domains.values(sort.key)) if domains.size(sort.key) < 10_000 else set()
    keys |= set(a.keys()) | set(b.keys())
    if not domains.bounded_ints and isinstance(sort.key, IntSort) and \
            not _equal(a.default, b.default, sort.value, domains):
        return False
    return all(_equal(a.get(k), b.get(k), sort.value, domains) for k in keys)


def _equal(x, y, sort: Sort, domains: Domains) -> bool:
    if isinstance(sort, MapSort):
        return map_equal(x, y, sort, domains)
    return x == y


# -- compilation ------------------------------------------------------------

Env = dict


def compile_expr(e: Expr, domains: Domains) -> Callable[[Env], object]:
    """Turn ``e`` into a closure over an environment of symbol values."""
    if isinstance(e, (IntLit, BoolLit)):
        v = e.value
        return lambda env: v
    if isinstance(e, Var):
        name = e.name

        def look(env):
            try:
                return env[name]
            except KeyError:
                raise UnassignedSymbol(name) from None
        return look
    if isinstance(e, Old):
        return compile_expr(e.expr, domains)
    if isinstance(e, Unary):
        f = compile_expr(e.operand, domains)
        if e.op == "-":
            return lambda env: -f(env)
        return lambda env: not f(env)
    if isinstance(e, Binary):
        return _compile_binary(e, domains)
    if isinstance(e, Select):
        m = compile_expr(e.map, domains)
        k = compile_expr(e.key, domains)
        return lambda env: m(env).get(k(env))
    if isinstance(e, Store):
        m = compile_expr(e.map, domains)
        k = compile_expr(e.key, domains)
        v = compile_expr(e.value, domains)
        return lambda env: m(env).store(k(env), v(env))
    if isinstance(e, App):
        name = e.func
        args = [compile_expr(a, domains) for a in e.args]

        def call(env):
            try:
                fn = env[name]
            except KeyError:
                raise UnassignedSymbol(name) from None
            return fn(*[a(env) for a in args])
        return call
    if isinstance(e, Forall):
        body = compile_expr(e.body, domains)
        binders = e.binders

        def forall(env):
            ranges = [domains.values(s) for _, s in binders]
            names = [n for n, _ in binders]
            inner = dict(env)
            for combo in itertools.product(*ranges):
                inner.update(zip(names, combo))
                if not body(inner):
                    return False
            return True
        return forall
    raise TypeError(f"cannot evaluate {e!r}")


def _compile_binary(e: Binary, domains: Domains):
    a = compile_expr(e.left, domains)
    b = compile_expr(e.right, domains)
    op = e.op
    if op == "&&":
        return lambda env: a(env) and b(env)
    if op == "||":
        return lambda env: a(env) or b(env)
    if op == "==>":
        return lambda env: (not a(env)) or b(env)
    if op in ("==", "!=") and isinstance(e.left.sort, MapSort):
        sort = e.left.sort
        if op == "==":
            return lambda env: map_equal(a(env), b(env), sort, domains)
        return lambda env: not map_equal(a(env), b(env), sort, domains)
    fn = {
        "+": lambda x, y: x + y, "-": lambda x, y: x - y, "*": lambda x, y: x * y,
        "==": lambda x, y: x == y, "!=": lambda x, y: x != y,
        "<": lambda x, y: x < y, "<=": lambda x, y: x <= y,
        ">": lambda x, y: x > y, ">=": lambda x, y: x >= y,
    }[op]
    return lambda env: fn(a(env), b(env))


def model_ints(model: Model) -> set[int]:
    """Integer constants occurring anywhere in a model's values."""
    out: set[int] = set()

    def visit(v):
        if isinstance(v, bool):
            return
        if isinstance(v, int):
            out.add(v)
        elif isinstance(v, MapValue):
            visit(v.default)
            for k, x in v.overrides:
                visit(k)
                visit(x)
        elif isinstance(v, FunctionValue):
            visit(v.default)
            for args, x in v.rows:
                for a in args:
                    visit(a)
                visit(x)
    for v in model.assignments.values():
        visit(v)
    return out


def eval(model: Model, e: Expr, bounds: DomainBounds | None = None):
    """Evaluate ``e`` under ``model``.

    Quantifiers range over the model's universe for uninterpreted sorts and
    over ``bounds`` (plus any integer the model mentions) for ``int``.
    """
    bounds = bounds or DomainBounds()
    domains = Domains(bounds, model.universe, extra_ints=model_ints(model),
                      bounded_ints=model.bounded)
    return compile_expr(e, domains)(model.assignments)


def model_fits(model: Model, bounds: DomainBounds) -> bool:
    """Whether every value of ``model`` lies inside ``bounds``."""
    if any(n > bounds.cardinality(s) for s, n in model.universe.items()):
        return False

    def ok(v) -> bool:
        if isinstance(v, bool):
            return True
        if isinstance(v, int):
            return bounds.int_lo <= v <= bounds.int_hi
        if isinstance(v, Elem):
            return v.index < bounds.cardinality(v.sort)
        if isinstance(v, MapValue):
            return ok(v.default) and all(ok(k) and ok(x) for k, x in v.overrides)
        if isinstance(v, FunctionValue):
            return ok(v.default) and all(all(map(ok, a)) and ok(x) for a, x in v.rows)
        return False
    return all(ok(v) for v in model.assignments.values())
