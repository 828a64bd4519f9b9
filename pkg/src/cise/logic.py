"""Verification-time vocabulary: indexed state copies, renamed operation
instances, effector relations and equality of states.

State variable ``v`` at state index ``i`` is the symbol ``v@i``; parameter
``p`` of instance ``k`` is ``p#k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from .errors import SortError
from .spec import Acquire, Operation, Param, Specification, modified_vars
from .terms import (
    BOUND, PARAM, STATE, TRUE, App, Binary, BoolLit, Expr, Forall, IntLit, MapSort,
    Old, Select, Store, Unary, Var, conj, eq, free_vars, walk,
)


def state_symbol(name: str, index: int) -> str:
    return f"{name}@{index}"


def param_symbol(name: str, instance: int) -> str:
    return f"{name}#{instance}"


def split_symbol(symbol: str) -> tuple[str, str, int] | None:
    """``'balance@1'`` -> ``('state', 'balance', 1)``; ``'amount#2'`` -> ``('param', 'amount', 2)``."""
    for sep, kind in (("@", STATE), ("#", PARAM)):
        base, found, idx = symbol.rpartition(sep)
        if found and idx.isdigit():
            return kind, base, int(idx)
    return None


@dataclass(frozen=True)
class OpInstance:
    op: Operation
    id: int
    params: tuple[Param, ...]
    requires: Expr
    ensures: Expr
    acquires: tuple[Acquire, ...]
    # every state variable of the enclosing spec; needed for frame conjuncts
    state: tuple[Param, ...] = ()

    @property
    def name(self) -> str:
        return self.op.name

    def param_vars(self) -> list[Var]:
        return [Var(p.name, PARAM, sort=p.sort) for p in self.params]


@dataclass(frozen=True)
class EffectorRelation:
    source: OpInstance
    from_index: int
    formula: Expr


def instantiate(op: Operation, id: int, state: tuple[Param, ...] = ()) -> OpInstance:
    if id < 1:
        raise ValueError("instance ids start at 1")
    binding = {p.name: Var(param_symbol(p.name, id), PARAM, sort=p.sort) for p in op.params}
    params = tuple(Param(param_symbol(p.name, id), p.sort) for p in op.params)
    acquires = tuple(
        Acquire(a.token, tuple(substitute(x, binding) for x in a.args), a.span)
        for a in op.acquires
    )
    return OpInstance(op, id, params, substitute(op.pre, binding),
                      substitute(op.post, binding), acquires, tuple(state))


def erase_instance(e: Expr) -> Expr:
    """Strip ``#k`` suffixes from parameter symbols."""
    binding = {}
    for name, sort in free_vars(e).items():
        parts = split_symbol(name)
        if parts and parts[0] == PARAM:
            binding[name] = Var(parts[1], PARAM, sort=sort)
    return substitute(e, binding)


def at_states(e: Expr, pre: int, post: int) -> Expr:
    """Map ``old(v)`` to ``v@pre`` and bare state variables to ``v@post``."""
    return _at_states(e, pre, post, False)


def _at_states(e: Expr, pre: int, post: int, in_old: bool) -> Expr:
    if isinstance(e, Var):
        if e.kind == STATE:
            return replace(e, name=state_symbol(e.name, pre if in_old else post))
        return e
    if isinstance(e, Old):
        return _at_states(e.expr, pre, post, True)
    return _map_children(e, lambda c: _at_states(c, pre, post, in_old))


def at_state(e: Expr, index: int) -> Expr:
    return at_states(e, index, index)


def effector(inst: OpInstance, from_index: int) -> EffectorRelation:
    if from_index < 0:
        raise ValueError("state indices start at 0")
    touched = modified_vars(inst.op)
    parts = [] if inst.ensures == TRUE else [at_states(inst.ensures, from_index, from_index + 1)]
    for v in inst.state:
        name, sort = v.name, v.sort
        if name not in touched:
            parts.append(eq(Var(state_symbol(name, from_index + 1), STATE, sort=sort),
                            Var(state_symbol(name, from_index), STATE, sort=sort)))
    return EffectorRelation(inst, from_index, conj(parts))


def state_equal(spec: Specification, a: int, b: int) -> Expr:
    parts = []
    for v in spec.variables:
        left = Var(state_symbol(v.name, a), STATE, sort=v.sort)
        right = Var(state_symbol(v.name, b), STATE, sort=v.sort)
        d = spec.equals_for(v.sort)
        if d is not None:
            parts.append(substitute(d.body, {d.left: left, d.right: right}))
        else:
            parts.append(default_equal(left, right))
    return conj(parts)


def default_equal(left: Expr, right: Expr) -> Expr:
    sort = left.sort
    if isinstance(sort, MapSort):
        k = Var("k", BOUND, sort=sort.key)
        body = default_equal(Select(left, k, sort=sort.value), Select(right, k, sort=sort.value))
        return Forall((("k", sort.key),), body)
    return eq(left, right)


def substitute(e: Expr, binding: dict[str, Expr]) -> Expr:
    """Capture-avoiding simultaneous substitution of free variables by name."""
    if not binding:
        return e
    for name, value in binding.items():
        if value.sort is None:
            raise SortError(value.span, None, f"a sorted replacement for {name}")
    return _subst(e, binding)


def _subst(e: Expr, binding: dict[str, Expr]) -> Expr:
    if isinstance(e, Var):
        new = binding.get(e.name)
        if new is None:
            return e
        if new.sort != e.sort:
            raise SortError(new.span, new.sort, e.sort)
        return new
    if isinstance(e, Forall):
        names = {n for n, _ in e.binders}
        inner = {k: v for k, v in binding.items() if k not in names}
        if not inner:
            return e
        incoming = set()
        for v in inner.values():
            incoming |= set(free_vars(v))
        binders = []
        body = e.body
        for n, s in e.binders:
            if n in incoming:
                taken = incoming | names | _all_names(body)
                fresh = next(f"{n}_{i}" for i in itertools.count(1) if f"{n}_{i}" not in taken)
                body = _subst(body, {n: Var(fresh, BOUND, sort=s)})
                binders.append((fresh, s))
            else:
                binders.append((n, s))
        return replace(e, binders=tuple(binders), body=_subst(body, inner))
    return _map_children(e, lambda c: _subst(c, binding))


def _all_names(e: Expr) -> set[str]:
    out = set()
    for n in walk(e):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Forall):
            out |= {b for b, _ in n.binders}
    return out


def _map_children(e: Expr, f) -> Expr:
    if isinstance(e, (IntLit, BoolLit, Var)):
        return e
    if isinstance(e, Old):
        return replace(e, expr=f(e.expr))
    if isinstance(e, Unary):
        return replace(e, operand=f(e.operand))
    if isinstance(e, Binary):
        return replace(e, left=f(e.left), right=f(e.right))
    if isinstance(e, Select):
        return replace(e, map=f(e.map), key=f(e.key))
    if isinstance(e, Store):
        return replace(e, map=f(e.map), key=f(e.key), value=f(e.value))
    if isinstance(e, App):
        return replace(e, args=tuple(f(a) for a in e.args))
    if isinstance(e, Forall):
        return replace(e, body=f(e.body))
    raise TypeError(f"unexpected node {e!r}")
