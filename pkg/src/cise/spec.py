"""The resolved, immutable model of one specification file."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .terms import STATE, TRUE, Expr, Old, Sort, Span, Var, children, conj


@dataclass(frozen=True)
class Param:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Clause:
    """One ``requires``/``ensures``/``axiom`` line, kept with its source span."""
    expr: Expr
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Acquire:
    token: str
    args: tuple[Expr, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Operation:
    name: str
    params: tuple[Param, ...]
    requires: tuple[Clause, ...] = ()
    ensures: tuple[Clause, ...] = ()
    acquires: tuple[Acquire, ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)

    @property
    def pre(self) -> Expr:
        return conj(c.expr for c in self.requires)

    @property
    def post(self) -> Expr:
        return conj(c.expr for c in self.ensures)

    @property
    def ensures_is_true(self) -> bool:
        return all(c.expr == TRUE for c in self.ensures)

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    arg_sorts: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class EqualsDef:
    """``equals(left: S, right: S) := body;`` -- the state equality for sort S."""
    sort: Sort
    left: str
    right: str
    body: Expr
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TokenDecl:
    name: str
    params: tuple[Param, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Specification:
    sorts: tuple[str, ...]
    functions: tuple[FunctionDecl, ...]
    axioms: tuple[Clause, ...]
    variables: tuple[Param, ...]
    equals: tuple[EqualsDef, ...]
    invariant: Clause
    operations: tuple[Operation, ...]
    tokens: tuple[TokenDecl, ...] = ()
    # symmetric: (a, b) present iff (b, a) present
    conflicts: frozenset[tuple[str, str]] = frozenset()
    origin: str = field(default="<string>", compare=False)

    @cached_property
    def variable_sorts(self) -> dict[str, Sort]:
        return {v.name: v.sort for v in self.variables}

    @cached_property
    def function_table(self) -> dict[str, FunctionDecl]:
        return {f.name: f for f in self.functions}

    @cached_property
    def token_table(self) -> dict[str, TokenDecl]:
        return {t.name: t for t in self.tokens}

    def operation(self, name: str) -> Operation:
        for op in self.operations:
            if op.name == name:
                return op
        raise KeyError(name)

    def equals_for(self, sort: Sort) -> EqualsDef | None:
        for d in self.equals:
            if d.sort == sort:
                return d
        return None

    def conflicting(self, a: str, b: str) -> bool:
        return (a, b) in self.conflicts

    @property
    def axiom(self) -> Expr:
        return conj(a.expr for a in self.axioms)


def modified_vars(op: Operation) -> set[str]:
    """State variables that occur in ``ensures`` outside any ``old(...)``."""
    out: set[str] = set()
    for c in op.ensures:
        _collect_modified(c.expr, out)
    return out


def _collect_modified(e: Expr, out: set[str]) -> None:
    if isinstance(e, Old):
        return
    if isinstance(e, Var):
        if e.kind == STATE:
            out.add(e.name)
        return
    for c in children(e):
        _collect_modified(c, out)


def symmetric(pairs) -> frozenset[tuple[str, str]]:
    out = set()
    for a, b in pairs:
        out.add((a, b))
        out.add((b, a))
    return frozenset(out)


def conflict_pairs(spec: Specification) -> list[tuple[str, str]]:
    """Each unordered conflict pair once, in a stable order."""
    return sorted({tuple(sorted(p)) for p in spec.conflicts})

