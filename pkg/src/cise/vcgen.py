"""One solver query per check.

Stage 1 (per operation): safety, anomaly, completeness.
Stage 2 (per unordered pair, self-pairs included): opposition, then, only for
pairs that can run concurrently, stability in each direction and
commutativity.

Instance 1 runs from state 0; paths through two effectors go 0 -> 1 -> 2 and,
for the swapped order in commutativity, 0 -> 3 -> 4.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable

from .logic import (
    OpInstance, at_state, effector, instantiate, split_symbol, state_equal, state_symbol,
    substitute,
)
from .printer import render_expr
from .spec import Operation, Specification
from .terms import (
    PARAM, STATE, App, Expr, Sort, Span, Var, conj, eq, free_vars, neg, ne, walk,
)


class CheckKind(enum.Enum):
    SAFETY = "safety"
    ANOMALY = "anomaly"
    COMPLETENESS = "completeness"
    OPPOSITION = "opposition"
    STABILITY = "stability"
    COMMUTATIVITY = "commutativity"

    @property
    def stage(self) -> int:
        return 1 if self in (CheckKind.SAFETY, CheckKind.ANOMALY, CheckKind.COMPLETENESS) else 2

    @property
    def polarity(self) -> str:
        return EXPECT_SAT if self in (CheckKind.ANOMALY, CheckKind.OPPOSITION) else EXPECT_UNSAT


EXPECT_SAT = "sat"
EXPECT_UNSAT = "unsat"


@dataclass(frozen=True)
class DecodeEntry:
    """Where a solver symbol comes from in the source."""
    kind: str  # "state" | "param" | "function"
    base: str
    sort: Sort
    index: int | None = None  # state index, or instance id for params
    op: str | None = None
    position: int | None = None  # 0-based position in the operation's parameter list
    arg_sorts: tuple[Sort, ...] = ()


@dataclass(frozen=True, order=True)
class ParamDisequality:
    """``left != right`` where each side is (instance id, 0-based parameter position)."""
    left: tuple[int, int]
    right: tuple[int, int]

    def __post_init__(self):
        if self.left == self.right:
            raise ValueError("a parameter cannot be restricted against itself")

    def vars(self, ops: tuple[OpInstance, ...]) -> tuple[Var, Var]:
        out = []
        for inst_id, pos in (self.left, self.right):
            inst = _by_id(ops, inst_id)
            p = inst.params[pos]
            out.append(Var(p.name, PARAM, sort=p.sort))
        if out[0].sort != out[1].sort:
            raise ValueError(f"{out[0].name} and {out[1].name} have different sorts")
        return out[0], out[1]

    def formula(self, ops: tuple[OpInstance, ...]) -> Expr:
        a, b = self.vars(ops)
        return ne(a, b)

    def positions(self, ops: tuple[OpInstance, ...]) -> tuple[int, int]:
        """1-based positions over the concatenated parameter lists of the instances."""
        def pos(side):
            inst_id, p = side
            offset = sum(len(i.params) for i in ops if i.id < inst_id)
            return offset + p + 1
        return pos(self.left), pos(self.right)

    def describe(self, ops: tuple[OpInstance, ...]) -> str:
        a, b = self.vars(ops)
        return f"{a.name} ≠ {b.name}"


def _by_id(ops, inst_id) -> OpInstance:
    for i in ops:
        if i.id == inst_id:
            return i
    raise KeyError(inst_id)


@dataclass(frozen=True)
class VerificationTask:
    kind: CheckKind
    ops: tuple[OpInstance, ...]
    query: Expr
    decode_items: tuple[tuple[str, DecodeEntry], ...] = field(repr=False)
    restrictions: frozenset[ParamDisequality] = frozenset()
    # the clause whose falsity is the failure (expect-unsat tasks only)
    goal: Expr | None = field(default=None, repr=False)
    goal_text: str = field(default="", repr=False)
    goal_span: Span | None = field(default=None, compare=False, repr=False)
    # anomaly only: the clauses that were found jointly unsatisfiable
    clauses: tuple[tuple[str, Span | None], ...] = field(default=(), compare=False, repr=False)

    @property
    def polarity(self) -> str:
        return self.kind.polarity

    @property
    def stage(self) -> int:
        return self.kind.stage

    @cached_property
    def decode(self) -> dict[str, DecodeEntry]:
        return dict(self.decode_items)

    @property
    def op_names(self) -> tuple[str, ...]:
        return tuple(i.name for i in self.ops)

    @property
    def name(self) -> str:
        return f"{self.kind.value}({', '.join(self.op_names)})"


def _decode(query: Expr, ops: Iterable[OpInstance], spec: Specification):
    insts = list(ops)
    items = []
    for sym, sort in sorted(free_vars(query).items()):
        parts = split_symbol(sym)
        if parts is None:
            raise ValueError(f"query mentions unindexed symbol {sym!r}")
        kind, base, idx = parts
        if kind == STATE:
            items.append((sym, DecodeEntry(STATE, base, sort, index=idx)))
        else:
            inst = _by_id(insts, idx)
            pos = [p.name for p in inst.params].index(sym)
            items.append((sym, DecodeEntry(PARAM, base, sort, index=idx, op=inst.name,
                                           position=pos)))
    for fname in sorted({n.func for n in walk(query) if isinstance(n, App)}):
        decl = spec.function_table[fname]
        items.append((fname, DecodeEntry("function", fname, decl.result,
                                         arg_sorts=decl.arg_sorts)))
    return tuple(items)


def _task(spec, kind, ops, parts, restrictions=frozenset(), goal=None, goal_text="",
          goal_span=None, clauses=()):
    query = conj([spec.axiom] + list(parts))
    return VerificationTask(kind, tuple(ops), query, _decode(query, ops, spec),
                            frozenset(restrictions), goal, goal_text, goal_span, tuple(clauses))


def _inst(spec: Specification, op: Operation | str, id: int) -> OpInstance:
    if isinstance(op, str):
        op = spec.operation(op)
    return instantiate(op, id, spec.variables)


def _inv(spec: Specification, index: int) -> Expr:
    return at_state(spec.invariant.expr, index)


def _pre(inst: OpInstance, index: int) -> Expr:
    return at_state(inst.requires, index)


def _pre_span(op: Operation) -> Span | None:
    return op.requires[0].span if op.requires else op.span


def _equal_span(spec: Specification) -> Span | None:
    return spec.equals[0].span if spec.equals else None


def token_compatibility(spec: Specification, a: OpInstance, b: OpInstance) -> Expr:
    """No conflicting token may be held by both instances with equal arguments."""
    parts = []
    for ta in a.acquires:
        for tb in b.acquires:
            if not spec.conflicting(ta.token, tb.token):
                continue
            if len(ta.args) == 1:
                parts.append(ne(ta.args[0], tb.args[0]))
            else:
                parts.append(neg(conj(eq(x, y) for x, y in zip(ta.args, tb.args))))
    return conj(parts)


# -- stage 1 ----------------------------------------------------------------

def vc_safety(spec: Specification, op) -> VerificationTask:
    i = _inst(spec, op, 1)
    goal = _inv(spec, 1)
    return _task(spec, CheckKind.SAFETY, [i],
                 [_inv(spec, 0), _pre(i, 0), effector(i, 0).formula, neg(goal)],
                 goal=goal, goal_text=render_expr(spec.invariant.expr),
                 goal_span=spec.invariant.span)


def vc_anomaly(spec: Specification, op) -> VerificationTask:
    i = _inst(spec, op, 1)
    clauses = [("invariant: " + render_expr(spec.invariant.expr), spec.invariant.span)]
    clauses += [("requires " + render_expr(c.expr), c.span) for c in i.op.requires]
    clauses += [("ensures " + render_expr(c.expr), c.span) for c in i.op.ensures]
    return _task(spec, CheckKind.ANOMALY, [i],
                 [_inv(spec, 0), _pre(i, 0), effector(i, 0).formula], clauses=clauses)


def vc_completeness(spec: Specification, op) -> VerificationTask:
    i = _inst(spec, op, 1)
    first = effector(i, 0).formula
    # the same effector from state 0 again, landing on state 2 instead of 1
    second = _retarget(spec, first, 1, 2)
    goal = state_equal(spec, 1, 2)
    return _task(spec, CheckKind.COMPLETENESS, [i],
                 [_inv(spec, 0), _pre(i, 0), first, second, neg(goal)],
                 goal=goal, goal_text=render_expr(goal), goal_span=_equal_span(spec))


def _retarget(spec: Specification, e: Expr, old: int, new: int) -> Expr:
    binding = {state_symbol(v.name, old): Var(state_symbol(v.name, new), STATE, sort=v.sort)
               for v in spec.variables}
    return substitute(e, binding)


# -- stage 2 ----------------------------------------------------------------

def _pair(spec, op_i, op_j) -> tuple[OpInstance, OpInstance]:
    return _inst(spec, op_i, 1), _inst(spec, op_j, 2)


def vc_opposition(spec: Specification, op_i, op_j) -> VerificationTask:
    a, b = _pair(spec, op_i, op_j)
    return _task(spec, CheckKind.OPPOSITION, [a, b],
                 [_inv(spec, 0), _pre(a, 0), _pre(b, 0), token_compatibility(spec, a, b)])


def vc_stability(spec: Specification, op_i, op_j,
                 restrictions: Iterable[ParamDisequality] = ()) -> VerificationTask:
    """Is the precondition of ``op_i`` preserved by the effector of ``op_j``?"""
    a, b = _pair(spec, op_i, op_j)
    restrictions = frozenset(restrictions)
    goal = _pre(a, 1)
    parts = [_inv(spec, 0), _pre(a, 0), _pre(b, 0), token_compatibility(spec, a, b)]
    parts += [r.formula((a, b)) for r in sorted(restrictions)]
    parts += [effector(b, 0).formula, neg(goal)]
    text = render_expr(a.op.pre)
    return _task(spec, CheckKind.STABILITY, [a, b], parts, restrictions,
                 goal=goal, goal_text=text, goal_span=_pre_span(a.op))


def vc_commutativity(spec: Specification, op_i, op_j) -> VerificationTask:
    a, b = _pair(spec, op_i, op_j)
    goal = state_equal(spec, 2, 4)
    parts = [_inv(spec, 0), _pre(a, 0), _pre(b, 0), token_compatibility(spec, a, b),
             effector(a, 0).formula, effector(b, 1).formula,
             _retarget(spec, effector(b, 0).formula, 1, 3), effector(a, 3).formula,
             neg(goal)]
    return _task(spec, CheckKind.COMMUTATIVITY, [a, b], parts,
                 goal=goal, goal_text=render_expr(goal), goal_span=_equal_span(spec))


# -- planning ---------------------------------------------------------------

def stage1_tasks(spec: Specification) -> list[VerificationTask]:
    out = []
    for op in spec.operations:
        out += [vc_safety(spec, op), vc_anomaly(spec, op), vc_completeness(spec, op)]
    return out


def pairs(spec: Specification) -> list[tuple[Operation, Operation]]:
    ops = spec.operations
    return [(ops[i], ops[j]) for i in range(len(ops)) for j in range(i, len(ops))]


def concurrent_tasks(spec: Specification, a: Operation, b: Operation) -> list[VerificationTask]:
    """Stability in both directions (once for a self-pair) and commutativity."""
    out = [vc_stability(spec, a, b)]
    if a.name != b.name:
        out.append(vc_stability(spec, b, a))
    out.append(vc_commutativity(spec, a, b))
    return out


def all_tasks(spec: Specification) -> list[VerificationTask]:
    """Every task of both stages, without gating."""
    out = stage1_tasks(spec)
    for a, b in pairs(spec):
        out.append(vc_opposition(spec, a, b))
        out += concurrent_tasks(spec, a, b)
    return out


def passed(task: VerificationTask, status: str) -> bool:
    """Whether a solver status ("sat"/"unsat"/"unknown") is the expected one."""
    return status == task.polarity


def plan(spec: Specification, run: Callable[[VerificationTask], str],
         stage: int = 2) -> list[VerificationTask]:
    """Tasks in report order. ``run`` returns the solver status of a task and
    decides the gating: stage 2 only after a clean stage 1, and a pair's
    stability/commutativity tasks only when its opposition query is sat."""
    out = stage1_tasks(spec)
    statuses = [run(t) for t in out]
    if stage < 2 or not all(passed(t, s) for t, s in zip(out, statuses)):
        return out
    for a, b in pairs(spec):
        opp = vc_opposition(spec, a, b)
        out.append(opp)
        if run(opp) == "sat":
            out += concurrent_tasks(spec, a, b)
    return out
