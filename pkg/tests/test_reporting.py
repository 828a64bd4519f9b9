import json

import pytest

import cise
from cise import vcgen
from cise.errors import ReplayMismatch
from cise.pipeline import Checker, verify
from cise.reporting import build_counterexample, render_json, render_text
from cise.solver import Elem, FiniteBackend, Model

from conftest import load


def report(name, backend=None):
    return verify(load(name), Checker(backend or FiniteBackend()))


def test_bank_v1_counterexample():
    r = report("bank_v1")
    fails = [x for x in r.results if x.verdict == "fail"]
    assert [x.task.name for x in fails] == ["safety(deposit)"]
    cex = fails[0].counterexample
    assert cex.clause == "(forall c: Client :: balance[c] >= 0)"
    assert cex.states == (1,) and cex.span.line == 13
    (inst,) = cex.parameters
    values = dict(inst.values)
    assert values["amount"] < 0 and values["accountId"] == Elem("Client", 0)
    assert [(v.name, v.state) for v in cex.variables] == [("balance", 0), ("balance", 1)]
    assert all(v.keys == (Elem("Client", 0),) for v in cex.variables)


def test_bank_v2_stability_counterexample():
    r = report("bank_v2")
    (fail,) = [x for x in r.results if x.verdict == "fail"]
    assert fail.task.name == "stability(withdraw, withdraw)"
    a, b = fail.counterexample.parameters
    assert (a.op, a.instance, b.op, b.instance) == ("withdraw", 1, "withdraw", 2)
    assert dict(a.values)["accountId"] == dict(b.values)["accountId"]


def test_anomaly_counterexample_lists_clauses():
    r = report("contradictory")
    (fail,) = [x for x in r.results if x.verdict == "fail"]
    cex = fail.counterexample
    assert cex.parameters == () and cex.variables == ()
    assert any("requires false" in text for text, _ in cex.clauses)


def test_replay_mismatch(bank_v1):
    task = vcgen.vc_safety(bank_v1, "deposit")
    good = FiniteBackend().check(task).model
    bad = Model(dict(good.assignments), good.universe)
    bad.assignments["balance@1"] = bad.assignments["balance@0"]
    with pytest.raises(ReplayMismatch):
        build_counterexample(task, bad)


def test_text_layout():
    text = render_text(report("bank_v1"))
    lines = text.splitlines()
    for header in ("BASE VERIFICATION", "SEQUENTIAL VERIFICATION", "CONCURRENT VERIFICATION"):
        assert header in lines
    assert "  safety(deposit): FAIL" in lines
    assert "  skipped (sequential verification did not pass)" in lines
    assert lines[-1] == "RESULT: NOT VERIFIED"
    i = lines.index("  safety(deposit): FAIL")
    assert lines[i + 1].startswith("    failing clause")

    v2 = render_text(report("bank_v2")).splitlines()
    assert "  stability(withdraw, withdraw): FAIL" in v2
    seq = v2[v2.index("SEQUENTIAL VERIFICATION") + 1:v2.index("CONCURRENT VERIFICATION") - 1]
    assert seq and all(line.endswith(": PASS") for line in seq)


def test_verified_and_opposed_lines():
    r = report("opposition")
    text = render_text(r)
    assert "  opposition(up, down): OPPOSED (pair skipped)" in text
    assert text.splitlines()[-1] == "RESULT: VERIFIED"
    data = json.loads(render_json(r))
    assert data["summary"] == "verified"
    assert all(t["counterexample"] is None for t in data["tasks"])


def test_json_mirror():
    r = report("bank_v2")
    data = json.loads(render_json(r))
    stab = [t for t in data["tasks"] if t["kind"] == "stability"]
    assert any(t["verdict"] == "fail" for t in stab)
    assert [t["name"] for t in data["tasks"]] == [x.task.name for x in r.results]
    assert data["summary"] == "not verified"
    assert json.loads(json.dumps(data)) == data


def test_unknown_makes_summary_unknown():
    r = report("bank_v2")
    r.results[0].verdict = "unknown"
    r.results[0].reason = "timeout"
    only_unknown = [x for x in r.results if x.verdict != "fail"]
    r.results = only_unknown
    assert r.summary == "unknown"
    assert "UNKNOWN (timeout)" in render_text(r)
    assert render_text(r).splitlines()[-1] == "RESULT: UNKNOWN"


@pytest.mark.parametrize("name", ["bank_v1", "bank_v2", "lww_register"])
def test_rendering_is_deterministic(name):
    r = report(name)
    assert render_text(r) == render_text(r) == render_text(report(name))
    assert render_json(r) == render_json(report(name))


@pytest.mark.parametrize("name", cise.corpus_names())
def test_fail_lines_match_counterexample_instances(name):
    for x in report(name).results:
        if x.counterexample is not None and x.counterexample.parameters:
            assert tuple(i.op for i in x.counterexample.parameters) == x.task.op_names
