import random

import pytest
from hypothesis import given, settings, strategies as st

from cise.errors import SortError
from cise.fuzz import random_spec
from cise.logic import (
    effector, erase_instance, instantiate, split_symbol, state_equal, substitute,
)
from cise.parser import parse_spec
from cise.printer import render_expr
from cise.spec import modified_vars
from cise.terms import (
    BOOL, INT, PARAM, STATE, Binary, BoolLit, Forall, IntLit, Var, conjuncts, free_vars,
)

from conftest import load


def v(name, sort=INT, kind=STATE):
    return Var(name, kind, sort=sort)


def add(a, b):
    return Binary("+", a, b, sort=INT)


def test_instances_are_disjoint(bank_v2):
    w = bank_v2.operation("withdraw")
    one, two = instantiate(w, 1), instantiate(w, 2)
    assert {p.name for p in one.params} == {"accountId#1", "amount#1"}
    assert {p.name for p in two.params} == {"accountId#2", "amount#2"}
    assert instantiate(w, 1) == one


def test_instance_id_must_be_positive(bank_v2):
    with pytest.raises(ValueError):
        instantiate(bank_v2.operation("withdraw"), 0)


def test_nullary_instance_keeps_requires():
    spec = load("opposition")
    up = spec.operation("up")
    inst = instantiate(up, 1)
    assert inst.params == () and inst.requires == up.pre


def test_renaming_round_trip(bank_v2):
    for op in bank_v2.operations:
        inst = instantiate(op, 2)
        assert erase_instance(inst.requires) == op.pre
        assert erase_instance(inst.ensures) == op.post


def test_deposit_effector(bank_v2):
    inst = instantiate(bank_v2.operation("deposit"), 1, bank_v2.variables)
    e = effector(inst, 0).formula
    assert render_expr(e) == \
        "balance@1 == balance@0[accountId#1 := balance@0[accountId#1] + amount#1]"


def test_frame_conjuncts():
    spec = parse_spec("@variable\nvar x: int;\nvar y: int;\n@invariant\ntrue;\n@operations\n"
                      "operation a()\n ensures x == 1;\noperation b()\n ensures true;\n")
    a = effector(instantiate(spec.operation("a"), 1, spec.variables), 0).formula
    assert "y@1 == y@0" in [render_expr(c) for c in conjuncts(a)]
    b = effector(instantiate(spec.operation("b"), 1, spec.variables), 3).formula
    assert sorted(render_expr(c) for c in conjuncts(b)) == ["x@4 == x@3", "y@4 == y@3"]


def test_state_equal(bank_v2):
    assert render_expr(state_equal(bank_v2, 1, 2)) == \
        "(forall c: Client :: balance@1[c] == balance@2[c])"
    single = parse_spec("@variable\nvar x: int;\n@invariant\ntrue;\n@operations\n"
                        "operation a()\n ensures true;\n")
    assert render_expr(state_equal(single, 1, 2)) == "x@1 == x@2"
    empty = parse_spec("@invariant\ntrue;\n@operations\noperation a()\n ensures true;\n")
    assert state_equal(empty, 1, 2) == BoolLit(True)


def test_default_map_equality_is_pointwise():
    spec = parse_spec("@init\ntype K;\n@variable\nvar m: [K]int;\n@invariant\ntrue;\n"
                      "@operations\noperation a()\n ensures true;\n")
    e = state_equal(spec, 0, 1)
    assert isinstance(e, Forall) and render_expr(e.body).startswith("m@0[")


def test_substitute_basics():
    e = add(v("x"), v("y"))
    assert render_expr(substitute(e, {"x": IntLit(3)})) == "3 + y"
    assert substitute(e, {}) == e


def test_substitute_leaves_bound_names():
    body = Binary(">=", v("k", INT, "bound"), v("x"), sort=BOOL)
    q = Forall((("k", INT),), body, sort=BOOL)
    assert substitute(q, {"k": IntLit(5)}) == q


def test_substitute_avoids_capture():
    body = Binary(">=", v("k", INT, "bound"), v("x"), sort=BOOL)
    q = Forall((("k", INT),), body, sort=BOOL)
    out = substitute(q, {"x": v("k")})
    # the free k must stay free
    assert "k" in free_vars(out)
    (binder, _), = out.binders
    assert binder != "k"


def test_substitute_rejects_sort_change():
    with pytest.raises(SortError):
        substitute(add(v("x"), v("y")), {"x": BoolLit(True)})


@settings(max_examples=100, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5))
def test_substitute_composes(a, b):
    e = add(add(v("x"), v("y")), v("z"))
    f = {"x": add(v("y"), IntLit(a))}
    g = {"y": IntLit(b)}
    composed = {"x": substitute(f["x"], g), **g}
    assert substitute(substitute(e, f), g) == substitute(e, composed)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_effector_constrains_each_post_symbol_once(seed):
    spec = parse_spec(random_spec(random.Random(seed)))
    for op in spec.operations:
        e = effector(instantiate(op, 1, spec.variables), 0).formula
        for var in spec.variables:
            post = f"{var.name}@1"
            hits = [c for c in conjuncts(e) if post in free_vars(c)]
            assert len(hits) == 1
            if var.name not in modified_vars(op):
                assert render_expr(hits[0]) == f"{post} == {var.name}@0"
        for sym in free_vars(e):
            kind, _, idx = split_symbol(sym)
            assert (kind == STATE and idx in (0, 1)) or (kind == PARAM and idx == 1)
