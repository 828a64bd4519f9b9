import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cise import vcgen
from cise.fuzz import corpus, random_spec
from cise.parser import parse_spec
from cise.solver import DomainBounds, FiniteBackend
from cise.solver.finite import solve
from cise.terms import conj, eq, free_vars
from cise.tokens import singletons
from cise.vcgen import CheckKind, ParamDisequality, vc_stability

from conftest import load


def status(backend, task):
    return backend.check(task).status


def test_stage_and_polarity():
    assert {k for k in CheckKind if k.stage == 1} == \
        {CheckKind.SAFETY, CheckKind.ANOMALY, CheckKind.COMPLETENESS}
    assert {k for k in CheckKind if k.polarity == vcgen.EXPECT_SAT} == \
        {CheckKind.ANOMALY, CheckKind.OPPOSITION}


def test_bank_v1_deposit_safety_sat(bank_v1, finite):
    v = finite.check(vcgen.vc_safety(bank_v1, "deposit"))
    assert v.is_sat and v.model["amount#1"] < 0


def test_bank_v2_stage1_passes(bank_v2, finite):
    for t in vcgen.stage1_tasks(bank_v2):
        assert vcgen.passed(t, status(finite, t)), t.name


def test_trivial_ensures_safety_unsat():
    spec = parse_spec("@variable\nvar x: int;\nvar y: int;\n@invariant\nx >= 0;\n"
                      "@operations\noperation a()\n ensures true;\n")
    assert status(FiniteBackend(), vcgen.vc_safety(spec, "a")) == "unsat"


def test_anomaly_examples(bank_v2, finite):
    assert status(finite, vcgen.vc_anomaly(bank_v2, "withdraw")) == "sat"
    assert status(finite, vcgen.vc_anomaly(load("contradictory"), "never")) == "unsat"
    spec = parse_spec("@variable\nvar x: int;\n@invariant\ntrue;\n@operations\n"
                      "operation a()\n ensures x == 0 && x == 1;\n")
    assert status(finite, vcgen.vc_anomaly(spec, "a")) == "unsat"


def test_completeness_examples(bank_v2):
    two = FiniteBackend(DomainBounds.of({"Client": 2}, (0, 3)))
    assert status(two, vcgen.vc_completeness(bank_v2, "deposit")) == "unsat"
    assert status(two, vcgen.vc_completeness(load("underdetermined"), "bump")) == "sat"
    spec = parse_spec("@variable\nvar x: int;\n@invariant\ntrue;\n@operations\n"
                      "operation a()\n ensures true;\n")
    assert status(two, vcgen.vc_completeness(spec, "a")) == "unsat"


def test_opposition_examples(bank_v2, finite):
    assert status(finite, vcgen.vc_opposition(bank_v2, "withdraw", "withdraw")) == "sat"
    assert status(finite, vcgen.vc_opposition(load("opposition"), "up", "down")) == "unsat"


def test_opposition_with_self_conflicting_token():
    spec = load("bank_tokens")
    two = FiniteBackend(DomainBounds.of({"Client": 2}))
    task = vcgen.vc_opposition(spec, "withdraw", "withdraw")
    v = two.check(task)
    assert v.is_sat and v.model["accountId#1"] != v.model["accountId#2"]
    a, b = task.ops
    same = eq(a.param_vars()[0], b.param_vars()[0])
    assert solve(conj([task.query, same]), two.bounds).is_unsat


def test_stability_examples(bank_v2, finite):
    v = finite.check(vc_stability(bank_v2, "withdraw", "withdraw"))
    assert v.is_sat and v.model["accountId#1"] == v.model["accountId#2"]
    ids = ParamDisequality((1, 0), (2, 0))
    amounts = ParamDisequality((1, 1), (2, 1))
    assert status(finite, vc_stability(bank_v2, "withdraw", "withdraw", [ids])) == "unsat"
    assert status(finite, vc_stability(bank_v2, "withdraw", "withdraw", [amounts])) == "sat"


def test_commutativity_examples(bank_v2):
    oracle = FiniteBackend(DomainBounds.of({"Client": 2}, (0, 3)))
    assert status(oracle, vcgen.vc_commutativity(bank_v2, "deposit", "deposit")) == "unsat"
    v = FiniteBackend().check(vcgen.vc_commutativity(load("lww_register"), "set", "set"))
    assert v.is_sat and v.model["v#1"] != v.model["v#2"]
    spec = parse_spec("@variable\nvar x: int;\n@invariant\ntrue;\n@operations\n"
                      "operation a(p: int)\n ensures x == old(x) + p;\n"
                      "operation b()\n ensures true;\n")
    assert status(FiniteBackend(), vcgen.vc_commutativity(spec, "a", "b")) == "unsat"


def test_param_disequality_positions(bank_v2):
    t = vc_stability(bank_v2, "withdraw", "withdraw")
    d = ParamDisequality((1, 0), (2, 0))
    assert d.positions(t.ops) == (1, 3)
    assert d.describe(t.ops) == "accountId#1 ≠ accountId#2"
    with pytest.raises(ValueError):
        ParamDisequality((1, 0), (1, 0))
    with pytest.raises(ValueError):
        ParamDisequality((1, 0), (2, 1)).vars(t.ops)


def _count_plan(spec, backend):
    # stage 1: three per operation; stage 2: per pair, opposition plus (if sat)
    # one stability per direction and a commutativity check
    ops = spec.operations
    n = 3 * len(ops)
    for i in range(len(ops)):
        for j in range(i, len(ops)):
            n += 1
            if status(backend, vcgen.vc_opposition(spec, ops[i], ops[j])) == "sat":
                n += (1 if i == j else 2) + 1
    return n


def test_plan_counts(bank_v1, bank_v2, finite):
    run = lambda t: status(finite, t)
    assert len(vcgen.plan(bank_v2, run)) == _count_plan(bank_v2, finite) == 16
    assert len(vcgen.plan(bank_v1, run)) == 6
    nullary = parse_spec("@invariant\ntrue;\n@operations\noperation a()\n ensures true;\n")
    assert len(vcgen.plan(nullary, run)) == 6
    assert len(vcgen.plan(bank_v2, run, stage=1)) == 6


def test_plan_skips_opposed_pair(finite):
    spec = load("opposition")
    names = [t.name for t in vcgen.plan(spec, lambda t: status(finite, t))]
    assert "opposition(up, down)" in names
    assert "commutativity(up, down)" not in names
    assert "commutativity(up, up)" in names


@pytest.mark.parametrize("seed", range(3))
def test_decode_map_covers_query(seed):
    for text in corpus(seed, 20):
        spec = parse_spec(text)
        for t in vcgen.all_tasks(spec):
            assert set(free_vars(t.query)) <= set(t.decode)


def test_token_compatibility_symmetric():
    spec = load("bank_tokens")
    a = vcgen._inst(spec, "withdraw", 1)
    b = vcgen._inst(spec, "withdraw", 2)
    ab = vcgen.token_compatibility(spec, a, b)
    ba = vcgen.token_compatibility(spec, b, a)
    assert set(free_vars(ab)) == set(free_vars(ba)) == {"accountId#1", "accountId#2"}


def test_disjoint_self_pair_is_direction_symmetric():
    # gcounter increments touch only their own key
    spec = load("gcounter")
    fin = FiniteBackend()
    op = spec.operation("increment")
    assert status(fin, vc_stability(spec, op, op)) == "unsat"


# -- properties over fuzzed specifications ------------------------------------

_SMALL = FiniteBackend(DomainBounds.of(int_range=(-2, 2)))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_pair_checks_symmetric(seed):
    spec = parse_spec(random_spec(random.Random(seed)))
    for a, b in vcgen.pairs(spec):
        for make in (vcgen.vc_opposition, vcgen.vc_commutativity):
            assert status(_SMALL, make(spec, a, b)) == status(_SMALL, make(spec, b, a))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_restrictions_monotone(seed):
    spec = parse_spec(random_spec(random.Random(seed)))
    for a in spec.operations:
        for b in spec.operations:
            single = [c.disequalities[0] for c in singletons(vc_stability(spec, a, b).ops)]
            subsets = [frozenset(s) for k in range(len(single) + 1)
                       for s in itertools.combinations(single, k)]
            got = {r: status(_SMALL, vc_stability(spec, a, b, r)) for r in subsets}
            for r in subsets:
                if got[r] == "unsat":
                    assert all(got[r2] == "unsat" for r2 in subsets if r <= r2)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_both_stability_directions_planned(seed):
    spec = parse_spec(random_spec(random.Random(seed)))
    names = {t.name for t in vcgen.all_tasks(spec)}
    for a, b in vcgen.pairs(spec):
        assert f"stability({a.name}, {b.name})" in names
        assert f"stability({b.name}, {a.name})" in names
