import pytest

from cise import vcgen
from cise.errors import NoSolution
from cise.parser import parse_spec
from cise.pipeline import Checker, run_plan
from cise.printer import render_spec
from cise.solver import DomainBounds, FiniteBackend
from cise.tokens import (
    EVIDENCE, EXHAUSTIVE, TokenModel, candidates, inject_tokens, render_token_model,
    synthesize,
)

from conftest import load


def checker():
    return Checker(FiniteBackend())


def stability_model(spec, a, b):
    t = vcgen.vc_stability(spec, a, b)
    return t, FiniteBackend().check(t).model


def test_bank_candidate_order(bank_v2):
    t, model = stability_model(bank_v2, "withdraw", "withdraw")
    cands = candidates(t.ops, model)
    assert [c.describe(t.ops) for c in cands] == [
        "accountId#1 ≠ accountId#2",
        "amount#1 ≠ amount#2",
        "accountId#1 ≠ accountId#2 and amount#1 ≠ amount#2",
    ]
    assert cands[0].evidence == (True,)


def test_evidence_puts_equal_parameters_first(bank_v2):
    # a model where the amounts differ and the accounts coincide
    t, model = stability_model(bank_v2, "withdraw", "withdraw")
    model.assignments["amount#2"] = 2
    cands = candidates(t.ops, model)
    assert cands[0].describe(t.ops) == "accountId#1 ≠ accountId#2"
    model.assignments["accountId#2"] = model.assignments["accountId#1"].__class__("Client", 1)
    model.assignments["amount#2"] = model.assignments["amount#1"]
    assert candidates(t.ops, model)[0].describe(t.ops) == "amount#1 ≠ amount#2"


def test_candidate_counts():
    spec = parse_spec("@init\ntype C;\n@variable\nvar x: int;\n@invariant\ntrue;\n@operations\n"
                      "operation a(p: int)\n ensures x == p;\n"
                      "operation b(c: C)\n ensures true;\n")
    a1 = vcgen._inst(spec, "a", 1)
    assert len(candidates((a1, vcgen._inst(spec, "a", 2)))) == 1
    assert candidates((a1, vcgen._inst(spec, "b", 2))) == []


def test_bank_synthesis(bank_v2):
    tm = synthesize(bank_v2, checker())
    (r,) = tm.restrictions
    assert r.chosen.positions(r.ops) == "parameter 1 ≠ parameter 3"
    assert [(t.name, t.params) for t in tm.templates()] == [("tok_withdraw", ("accountId",))]
    assert tm.conflicts == {("tok_withdraw", "tok_withdraw")}
    outcomes = {a.candidate.describe(r.ops): a.outcome for a in r.attempts}
    assert outcomes == {"accountId#1 ≠ accountId#2": "accepted",
                        "amount#1 ≠ amount#2": "rejected"}


def test_forced_order_rejects_amounts_first(bank_v2):
    tm = synthesize(bank_v2, checker(), first=lambda c: list(reversed(c)))
    (r,) = tm.restrictions
    first = r.attempts[0]
    assert first.candidate.describe(r.ops) == "amount#1 ≠ amount#2"
    assert first.outcome == "rejected" and first.reason == "stability still fails"
    assert r.chosen.describe(r.ops) == "accountId#1 ≠ accountId#2"


def test_ordering_is_behavior_preserving(bank_v2):
    ev = synthesize(bank_v2, checker(), order=EVIDENCE)
    ex = synthesize(bank_v2, checker(), order=EXHAUSTIVE)
    assert ev.signature() == ex.signature()
    assert ev.solver_calls < ex.solver_calls


def test_injected_spec_passes_stage2(bank_v2):
    tm = synthesize(bank_v2, checker())
    injected = inject_tokens(bank_v2, tm)
    assert parse_spec(render_spec(injected)) == injected
    results = run_plan(injected, checker())
    assert all(r.verdict == "pass" for r in results)
    # the injected tokens match the hand-written tokenized bank
    assert injected.conflicts == load("bank_tokens").conflicts


def test_cross_operation_tokens():
    spec = load("auction")
    tm = synthesize(spec, checker())
    assert [(t.name, t.op) for t in tm.templates()] == [("tok_bid", "bid"), ("tok_close", "close")]
    assert tm.conflicts == {("tok_bid", "tok_close"), ("tok_close", "tok_bid")}


def test_parameter_independent_failure_has_no_solution():
    spec = load("bounded_counter")
    # oracle: stability stays sat under every restriction set
    t = vcgen.vc_stability(spec, "add", "add")
    for cand in candidates(t.ops) + [None]:
        ds = cand.disequalities if cand else ()
        assert FiniteBackend().check(vcgen.vc_stability(spec, "add", "add", ds)).is_sat
    with pytest.raises(NoSolution) as exc:
        synthesize(spec, checker())
    assert exc.value.pairs == [("add", "add")]


def test_validation_failure_is_no_solution():
    # stability is fixable by tokens but commutativity of concurrent writes is not
    spec = parse_spec("@variable\nvar x: int;\n@invariant\ntrue;\n@operations\n"
                      "operation set(v: int)\n requires x != v;\n ensures x == v;\n")
    tm_or_error = None
    try:
        tm_or_error = synthesize(spec, checker())
    except NoSolution as exc:
        tm_or_error = exc
    assert isinstance(tm_or_error, NoSolution)


def test_minimality_of_unions():
    # two keys taken at once: the instances must use disjoint key pairs, so
    # every cross-instance disequality is needed
    spec = parse_spec("@init\ntype K;\n@variable\nvar m: [K]int;\n"
                      "@invariant\n(forall k: K :: m[k] >= 0);\n@operations\n"
                      "operation take(a: K, b: K)\n requires m[a] >= 1 && m[b] >= 1;\n"
                      " requires a != b;\n"
                      " ensures m == old(m)[a := old(m)[a] - 1][b := old(m)[b] - 1];\n")
    three = FiniteBackend(DomainBounds.of({"K": 3}))
    tm = synthesize(spec, Checker(three), validate=False)
    (r,) = tm.restrictions
    ds = r.chosen.disequalities
    assert len(ds) == 4
    for i in range(len(ds)):
        sub = ds[:i] + ds[i + 1:]
        assert three.check(vcgen.vc_stability(spec, "take", "take", sub)).is_sat
    assert [t.name for t in tm.templates()] == ["tok_take_a", "tok_take_b"]


def test_two_failing_pairs_are_ordered():
    spec = load("capped")
    # nullary operations: nothing to restrict
    with pytest.raises(NoSolution) as exc:
        synthesize(spec, checker())
    assert exc.value.pairs == [("fill", "fill"), ("drain", "drain")]
    spec = parse_spec("@init\ntype K;\n@variable\nvar m: [K]int;\n"
                      "@invariant\n(forall k: K :: m[k] >= 0);\n@operations\n"
                      "operation b(k: K)\n requires m[k] >= 1;\n"
                      " ensures m == old(m)[k := old(m)[k] - 1];\n"
                      "operation a(k: K)\n requires m[k] >= 1;\n"
                      " ensures m == old(m)[k := old(m)[k] - 1];\n")
    tm = synthesize(spec, checker())
    text = render_token_model(tm).splitlines()
    entries = [line.split(":")[0].strip() for line in text if line.startswith("  stability")]
    assert entries == sorted(entries) and len(entries) == 4


def test_render_token_model(bank_v2):
    text = render_token_model(synthesize(bank_v2, checker()))
    assert "withdraw: requires token tok_withdraw(accountId)" in text
    assert "conflict: tok_withdraw tok_withdraw" in text
    assert "parameter 1 ≠ parameter 3" in text
    assert render_token_model(TokenModel()) == "RESTRICTIONS\n  none\n\nTOKEN MODEL\n  none\n"
