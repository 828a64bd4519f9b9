"""Counterexamples for failed checks, and the text/JSON run reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ReplayMismatch, UnassignedSymbol
from .logic import split_symbol, state_symbol
from .solver.values import DomainBounds, Elem, FunctionValue, MapValue, Model, eval, format_value
from .terms import STATE, MapSort, Span, free_vars
from .vcgen import EXPECT_SAT, CheckKind, VerificationTask


@dataclass(frozen=True)
class InstanceValues:
    op: str
    instance: int
    values: tuple[tuple[str, object], ...]  # (source parameter name, value)

    @property
    def label(self) -> str:
        return f"{self.op}#{self.instance}"


@dataclass(frozen=True)
class VariableValue:
    name: str
    state: int
    value: object
    # for maps: the keys shown (parameter-valued keys of the key sort)
    keys: tuple = ()

    @property
    def symbol(self) -> str:
        return state_symbol(self.name, self.state)


@dataclass(frozen=True)
class Counterexample:
    check: CheckKind
    task: str
    clause: str
    span: Span | None
    states: tuple[int, ...]  # state indices the failing clause mentions
    parameters: tuple[InstanceValues, ...]
    variables: tuple[VariableValue, ...]
    # anomaly only: clauses that admit no state at all
    clauses: tuple[tuple[str, Span | None], ...] = ()


def build_counterexample(task: VerificationTask, model: Model | None,
                         bounds: DomainBounds | None = None) -> Counterexample:
    """Project a model onto the failing clause; raise ReplayMismatch if the
    model does not falsify it."""
    if task.polarity == EXPECT_SAT:
        return Counterexample(task.kind, task.name, "no state satisfies all of", None, (), (), (),
                              clauses=task.clauses)
    if model is None:
        raise ValueError(f"{task.name}: a model is needed")
    try:
        holds = eval(model, task.goal, bounds)
    except UnassignedSymbol as exc:
        raise ReplayMismatch(f"{task.name}: model leaves {exc.name} unassigned") from None
    if holds is not False:
        raise ReplayMismatch(f"{task.name}: model does not falsify {task.goal_text}")

    params = []
    for inst in task.ops:
        vals = tuple((p.name.rpartition("#")[0], model.assignments.get(p.name)) for p in inst.params)
        params.append(InstanceValues(inst.name, inst.id, vals))

    states: set[int] = set()
    names: set[str] = set()
    for sym in free_vars(task.goal):
        parts = split_symbol(sym)
        if parts and parts[0] == STATE:
            names.add(parts[1])
            states.add(parts[2])
    variables = []
    for name in sorted(names):
        for idx in sorted(states | {0}):
            sym = state_symbol(name, idx)
            if sym not in model.assignments:
                continue
            value = model.assignments[sym]
            keys = ()
            sort = task.decode[sym].sort if sym in task.decode else None
            if isinstance(sort, MapSort):
                keys = _relevant_keys(task, model, sort.key)
            variables.append(VariableValue(name, idx, value, keys))
    return Counterexample(task.kind, task.name, task.goal_text, task.goal_span,
                          tuple(sorted(states)), tuple(params), tuple(variables))


def _relevant_keys(task: VerificationTask, model: Model, key_sort) -> tuple:
    keys = []
    for inst in task.ops:
        for p in inst.params:
            if p.sort == key_sort and p.name in model.assignments:
                v = model.assignments[p.name]
                if v not in keys:
                    keys.append(v)
    return tuple(sorted(keys, key=_order))


def _order(v):
    if isinstance(v, Elem):
        return (1, v.sort, v.index)
    return (0, "", int(v))


# -- reports ----------------------------------------------------------------

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"


@dataclass
class TaskResult:
    task: VerificationTask
    status: str  # solver answer: sat | unsat | unknown
    verdict: str  # pass | fail | unknown
    reason: str | None = None
    bounded: bool = False
    counterexample: Counterexample | None = None
    model: Model | None = field(default=None, repr=False)


@dataclass
class Report:
    origin: str
    backend: str
    results: list[TaskResult]
    stage_limit: int = 2
    notes: list[str] = field(default_factory=list)
    # token synthesis, when requested
    tokens: object | None = None
    token_error: str | None = None
    tokenized: list[TaskResult] | None = None

    def stage(self, n: int) -> list[TaskResult]:
        return [r for r in self.results if r.task.stage == n]

    @property
    def stage1_passed(self) -> bool:
        return all(r.verdict == PASS for r in self.stage(1))

    @property
    def base_summary(self) -> str:
        return summarize(self.results)

    @property
    def summary(self) -> str:
        if self.tokenized is not None and self.tokens is not None:
            return summarize(self.tokenized)
        return self.base_summary

    @property
    def counterexamples(self) -> list[Counterexample]:
        out = [r.counterexample for r in self.results if r.counterexample]
        out += [r.counterexample for r in self.tokenized or () if r.counterexample]
        return out


def summarize(results) -> str:
    verdicts = {r.verdict for r in results}
    if FAIL in verdicts:
        return "not verified"
    if UNKNOWN in verdicts:
        return "unknown"
    return "verified"


def status_word(r: TaskResult) -> str:
    if r.task.kind == CheckKind.OPPOSITION and r.verdict != UNKNOWN:
        word = "CONCURRENT" if r.status == "sat" else "OPPOSED (pair skipped)"
    elif r.verdict == UNKNOWN:
        word = f"UNKNOWN ({r.reason})" if r.reason else "UNKNOWN"
    else:
        word = r.verdict.upper()
    if r.bounded:
        word += " [bounded]"
    return word


def render_value(value, keys=()) -> str:
    if isinstance(value, MapValue):
        shown = [f"[{format_value(k)}] = {render_value(value.get(k))}" for k in keys]
        shown.append(f"default = {render_value(value.default)}")
        return ", ".join(shown)
    if isinstance(value, FunctionValue):
        return f"function (default {render_value(value.default)})"
    if value is None:
        return "?"
    return format_value(value)


def render_counterexample(cex: Counterexample, indent: str = "    ") -> list[str]:
    lines = []
    if cex.clauses:
        lines.append(f"{indent}{cex.clause}:")
        for text, span in cex.clauses:
            where = f" ({span})" if span else ""
            lines.append(f"{indent}  {text}{where}")
        return lines
    where = f" ({cex.span})" if cex.span else ""
    lines.append(f"{indent}failing clause{where}: {cex.clause}")
    if cex.states:
        lines.append(f"{indent}  evaluated at state " + ", ".join(map(str, cex.states)))
    lines.append(f"{indent}parameters:")
    for inst in cex.parameters:
        vals = ", ".join(f"{n} = {render_value(v)}" for n, v in inst.values) or "(none)"
        lines.append(f"{indent}  {inst.label}: {vals}")
    if cex.variables:
        lines.append(f"{indent}variables:")
        for var in cex.variables:
            lines.append(f"{indent}  {var.symbol}: {render_value(var.value, var.keys)}")
    return lines


def _render_results(results, lines: list[str]) -> None:
    for r in results:
        lines.append(f"  {r.task.name}: {status_word(r)}")
        if r.counterexample is not None:
            lines += render_counterexample(r.counterexample)


def render_text(report: Report) -> str:
    lines = [f"spec: {report.origin}", f"backend: {report.backend}"]
    lines += [f"note: {n}" for n in report.notes]
    lines += ["", "BASE VERIFICATION", "  syntax: PASS", "", "SEQUENTIAL VERIFICATION"]
    _render_results(report.stage(1), lines)
    lines += ["", "CONCURRENT VERIFICATION"]
    if report.stage_limit < 2:
        lines.append("  skipped (stage limit 1)")
    elif not report.stage1_passed:
        lines.append("  skipped (sequential verification did not pass)")
    else:
        _render_results(report.stage(2), lines)
    if report.tokens is not None:
        lines += [""] + report.tokens.render().splitlines()
    if report.token_error:
        lines += ["", "TOKEN SYNTHESIS", f"  no solution: {report.token_error}"]
    if report.tokenized is not None:
        lines += ["", "CONCURRENT VERIFICATION WITH TOKENS"]
        _render_results(report.tokenized, lines)
    lines += ["", f"RESULT: {report.summary.upper()}"]
    return "\n".join(lines) + "\n"


# -- JSON -------------------------------------------------------------------

def value_json(v):
    if isinstance(v, bool) or isinstance(v, int) or v is None:
        return v
    if isinstance(v, Elem):
        return str(v)
    if isinstance(v, MapValue):
        return {"default": value_json(v.default),
                "overrides": [[value_json(k), value_json(x)] for k, x in v.overrides]}
    if isinstance(v, FunctionValue):
        return {"default": value_json(v.default),
                "rows": [[[value_json(a) for a in args], value_json(x)] for args, x in v.rows]}
    return str(v)


def _span_json(span: Span | None):
    return None if span is None else {"line": span.line, "column": span.column}


def counterexample_json(cex: Counterexample) -> dict:
    return {
        "check": cex.check.value,
        "task": cex.task,
        "clause": cex.clause,
        "span": _span_json(cex.span),
        "states": list(cex.states),
        "parameters": [
            {"op": i.op, "instance": i.instance,
             "values": {n: value_json(v) for n, v in i.values}}
            for i in cex.parameters
        ],
        "variables": [
            {"name": v.name, "state": v.state, "value": value_json(v.value),
             "keys": [value_json(k) for k in v.keys]}
            for v in cex.variables
        ],
        "clauses": [{"text": t, "span": _span_json(s)} for t, s in cex.clauses],
    }


def result_json(r: TaskResult) -> dict:
    return {
        "kind": r.task.kind.value,
        "stage": r.task.stage,
        "ops": list(r.task.op_names),
        "name": r.task.name,
        "verdict": r.verdict,
        "outcome": r.status,
        "reason": r.reason,
        "bounded": r.bounded,
        "counterexample": counterexample_json(r.counterexample) if r.counterexample else None,
    }


def report_json(report: Report) -> dict:
    tokens = None
    if report.tokens is not None:
        tokens = report.tokens.to_json()
    elif report.token_error:
        tokens = {"error": report.token_error}
    return {
        "spec": report.origin,
        "backend": report.backend,
        "stage_limit": report.stage_limit,
        "notes": list(report.notes),
        "summary": report.summary,
        "tasks": [result_json(r) for r in report.results],
        "tokens": tokens,
        "tokenized_tasks": None if report.tokenized is None
        else [result_json(r) for r in report.tokenized],
    }


def render_json(report: Report) -> str:
    return json.dumps(report_json(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
