"""Sorts, source spans and the expression tree used everywhere downstream.

Expression nodes are frozen dataclasses. Spans are excluded from equality so
two trees that differ only in where they were parsed compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, col {self.column}"


# -- sorts ------------------------------------------------------------------

class Sort:
    __slots__ = ()


@dataclass(frozen=True)
class IntSort(Sort):
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class BoolSort(Sort):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class USort(Sort):
    """An uninterpreted sort declared with ``type Name;``."""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class MapSort(Sort):
    key: Sort
    value: Sort

    def __str__(self) -> str:
        return f"[{self.key}]{self.value}"


INT = IntSort()
BOOL = BoolSort()


# -- expressions ------------------------------------------------------------

ARITH_OPS = ("+", "-", "*")
ORDER_OPS = ("<", "<=", ">", ">=")
EQ_OPS = ("==", "!=")
BOOL_OPS = ("&&", "||", "==>")

# variable kinds
STATE = "state"
PARAM = "param"
BOUND = "bound"


class Expr:
    __slots__ = ()
    sort: Sort | None
    span: Span | None


def _meta():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    sort: Sort | None = INT
    span: Span | None = _meta()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    sort: Sort | None = BOOL
    span: Span | None = _meta()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    kind: str = STATE
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class Old(Expr):
    expr: Expr
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class Select(Expr):
    map: Expr
    key: Expr
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class Store(Expr):
    map: Expr
    key: Expr
    value: Expr
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class App(Expr):
    func: str
    args: tuple[Expr, ...]
    sort: Sort | None = None
    span: Span | None = _meta()


@dataclass(frozen=True)
class Forall(Expr):
    binders: tuple[tuple[str, Sort], ...]
    body: Expr
    sort: Sort | None = BOOL
    span: Span | None = _meta()


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Old,)):
        return (e.expr,)
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Select):
        return (e.map, e.key)
    if isinstance(e, Store):
        return (e.map, e.key, e.value)
    if isinstance(e, App):
        return e.args
    if isinstance(e, Forall):
        return (e.body,)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk(c)


def free_vars(e: Expr, bound: frozenset[str] = frozenset()) -> dict[str, Sort]:
    """Free variable occurrences (name -> sort), excluding quantifier binders."""
    out: dict[str, Sort] = {}
    _free_vars(e, bound, out)
    return out


def _free_vars(e: Expr, bound, out) -> None:
    if isinstance(e, Var):
        if e.name not in bound:
            out[e.name] = e.sort
        return
    if isinstance(e, Forall):
        _free_vars(e.body, bound | {n for n, _ in e.binders}, out)
        return
    for c in children(e):
        _free_vars(c, bound, out)


def functions_used(e: Expr) -> set[str]:
    return {n.func for n in walk(e) if isinstance(n, App)}


def symbols(e: Expr) -> set[str]:
    """Every free name an evaluator has to look up: variables and functions."""
    return set(free_vars(e)) | functions_used(e)


# -- smart constructors -----------------------------------------------------

def conj(parts) -> Expr:
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Binary("&&", out, p, sort=BOOL)
    return out


def conjuncts(e: Expr) -> list[Expr]:
    """Flatten nested ``&&`` into a list, left to right."""
    if isinstance(e, Binary) and e.op == "&&":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def neg(e: Expr) -> Expr:
    return Unary("!", e, sort=BOOL)


def eq(a: Expr, b: Expr) -> Expr:
    return Binary("==", a, b, sort=BOOL)


def ne(a: Expr, b: Expr) -> Expr:
    return Binary("!=", a, b, sort=BOOL)


def var(name: str, sort: Sort, kind: str = STATE) -> Var:
    return Var(name, kind, sort=sort)
