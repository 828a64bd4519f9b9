"""Token synthesis from failed stability checks.

For each failing stability pair the synthesizer tries parameter
disequalities as extra assumptions, keeps the first minimal set that makes
the check pass, and turns the chosen disequalities into token templates with
conflicts. The injected tokens are then validated by a full stage-2 rerun.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import NoSolution, UnassignedSymbol
from .logic import OpInstance
from .pipeline import run_plan, stability_failures
from .solver.values import Model, eval
from .spec import Acquire, Param, Specification, TokenDecl, symmetric
from .terms import PARAM, Var, conj
from .vcgen import ParamDisequality, VerificationTask, vc_stability

EVIDENCE = "evidence"
EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class RestrictionCandidate:
    disequalities: tuple[ParamDisequality, ...]
    # per disequality: were its two parameters equal in the triggering model?
    evidence: tuple[bool, ...]

    @property
    def key(self) -> frozenset[ParamDisequality]:
        return frozenset(self.disequalities)

    def describe(self, ops) -> str:
        return " and ".join(d.describe(ops) for d in self.disequalities)

    def positions(self, ops) -> str:
        return " and ".join("parameter {} ≠ parameter {}".format(*d.positions(ops))
                            for d in self.disequalities)


@dataclass(frozen=True)
class Attempt:
    candidate: RestrictionCandidate
    outcome: str  # accepted | rejected | not minimal | unknown
    reason: str
    solver_call: bool


@dataclass(frozen=True)
class PairRestriction:
    """The restriction chosen for one failing stability task."""
    task: str
    ops: tuple[OpInstance, ...]
    chosen: RestrictionCandidate
    attempts: tuple[Attempt, ...]


@dataclass(frozen=True)
class TokenTemplate:
    name: str
    op: str
    params: tuple[str, ...]


@dataclass
class TokenModel:
    restrictions: list[PairRestriction] = field(default_factory=list)
    tokens: dict[str, list[TokenTemplate]] = field(default_factory=dict)
    conflicts: frozenset[tuple[str, str]] = frozenset()
    solver_calls: int = 0

    def templates(self) -> list[TokenTemplate]:
        return [t for op in sorted(self.tokens) for t in self.tokens[op]]

    def conflict_list(self) -> list[tuple[str, str]]:
        return sorted({tuple(sorted(p)) for p in self.conflicts})

    def render(self) -> str:
        return render_token_model(self)

    def to_json(self) -> dict:
        return token_model_json(self)

    def signature(self):
        """Everything but the search log, for comparing two synthesis runs."""
        return (
            tuple((r.task, r.chosen.key) for r in self.restrictions),
            tuple(self.templates()),
            self.conflicts,
        )


# -- candidates -------------------------------------------------------------

def _param_value(model: Model | None, inst: OpInstance, pos: int):
    if model is None:
        return None
    return model.assignments.get(inst.params[pos].name)


def singletons(pair: tuple[OpInstance, OpInstance], model: Model | None = None
               ) -> list[RestrictionCandidate]:
    a, b = pair
    found = []
    for p, pa in enumerate(a.params):
        for q, pb in enumerate(b.params):
            if pa.sort == pb.sort:
                found.append((p, q))
    if a.name == b.name:
        # matching positions first
        found.sort(key=lambda pq: pq[0] != pq[1])
    out = []
    for p, q in found:
        d = ParamDisequality((a.id, p), (b.id, q))
        va, vb = _param_value(model, a, p), _param_value(model, b, q)
        out.append(RestrictionCandidate((d,), (model is not None and va == vb,)))
    return out


def _evidence_sorted(cands: list[RestrictionCandidate]) -> list[RestrictionCandidate]:
    return sorted(cands, key=lambda c: sum(not e for e in c.evidence))


def unions(single: list[RestrictionCandidate], size: int) -> list[RestrictionCandidate]:
    out = []
    for combo in itertools.combinations(single, size):
        ds = tuple(d for c in combo for d in c.disequalities)
        ev = tuple(e for c in combo for e in c.evidence)
        out.append(RestrictionCandidate(ds, ev))
    return out


def candidates(pair: tuple[OpInstance, OpInstance], model: Model | None = None
               ) -> list[RestrictionCandidate]:
    """Singleton disequalities, equal-in-model ones first, then two-element unions."""
    single = _evidence_sorted(singletons(pair, model))
    return single + _evidence_sorted(unions(single, 2))


# -- search -----------------------------------------------------------------

Checker = Callable[[VerificationTask], object]


class _PairSearch:
    def __init__(self, spec: Specification, task, model: Model | None, checker, order, bounds):
        self.spec = spec
        self.task = task
        self.ops = task.ops
        self.checker = checker
        self.order = order
        self.bounds = bounds
        self.witnesses: list[Model] = [model] if model is not None else []
        self.results: dict[frozenset, bool | None] = {}
        self.attempts: list[Attempt] = []
        self.calls = 0

    def _satisfied_by_witness(self, cand: RestrictionCandidate) -> bool:
        formula = conj(d.formula(self.ops) for d in cand.disequalities)
        for m in self.witnesses:
            try:
                if eval(m, formula, self.bounds) is True:
                    return True
            except UnassignedSymbol:
                continue
        return False

    def holds(self, cand: RestrictionCandidate, log: bool = True) -> bool | None:
        """Does stability pass under the candidate? None when the solver cannot tell."""
        key = cand.key
        if key in self.results:
            return self.results[key]
        if self.order != EXHAUSTIVE and self._satisfied_by_witness(cand):
            self.results[key] = False
            if log:
                self.attempts.append(Attempt(cand, "rejected",
                                             "a known counterexample already satisfies it", False))
            return False
        a, b = self.ops
        restricted = vc_stability(self.spec, a.op, b.op, cand.disequalities)
        verdict = self.checker(restricted)
        self.calls += 1
        if verdict.is_sat:
            self.witnesses.append(verdict.model)
            result = False
        elif verdict.is_unsat:
            result = True
        else:
            result = None
        self.results[key] = result
        if log:
            if result is None:
                self.attempts.append(Attempt(cand, "unknown", f"solver gave up ({verdict.reason})",
                                             True))
            elif result:
                self.attempts.append(Attempt(cand, "passes", "stability holds", True))
            else:
                self.attempts.append(Attempt(cand, "rejected", "stability still fails", True))
        return result

    def minimal(self, cand: RestrictionCandidate) -> bool:
        ds = cand.disequalities
        for k in range(1, len(ds)):
            for sub in itertools.combinations(ds, k):
                sub_c = RestrictionCandidate(sub, tuple(False for _ in sub))
                if self.holds(sub_c, log=False) is not False:
                    return False
        return True

    def run(self, first: Callable | None = None) -> RestrictionCandidate | None:
        single = singletons(self.ops, self.witnesses[0] if self.witnesses else None)
        if first is not None:
            ordered = first(single)
        elif self.order == EVIDENCE:
            ordered = _evidence_sorted(single)
        else:
            ordered = single
        if self.order == EXHAUSTIVE:
            return self._run_exhaustive(ordered)
        chosen = None
        # every singleton is classified so rejected alternatives are on record
        for c in ordered:
            if self.holds(c) and chosen is None:
                chosen = c
        for size in range(2, len(ordered) + 1):
            if chosen is not None:
                break
            pool = unions(ordered, size)
            if self.order == EVIDENCE:
                pool = _evidence_sorted(pool)
            for c in pool:
                if self.holds(c) and self.minimal(c):
                    chosen = c
                    break
        self._mark(chosen)
        return chosen

    def _run_exhaustive(self, ordered) -> RestrictionCandidate | None:
        pool = []
        for size in range(1, len(ordered) + 1):
            pool += unions(ordered, size)
        chosen = None
        for c in pool:
            if self.holds(c) and chosen is None and self.minimal(c):
                chosen = c
        self._mark(chosen)
        return chosen

    def _mark(self, chosen):
        out = []
        for att in self.attempts:
            if att.outcome == "passes":
                if chosen is not None and att.candidate.key == chosen.key:
                    att = replace(att, outcome="accepted")
                elif chosen is not None and chosen.key < att.candidate.key:
                    att = replace(att, outcome="not minimal")
                else:
                    att = replace(att, outcome="not chosen")
            out.append(att)
        self.attempts = out


def search_pair(spec: Specification, task: VerificationTask, model: Model | None, checker,
                order=EVIDENCE, bounds=None, first=None):
    s = _PairSearch(spec, task, model, checker, order, bounds)
    chosen = s.run(first)
    return chosen, tuple(s.attempts), s.calls


# -- token model ------------------------------------------------------------

def build_token_model(spec: Specification, chosen: list[PairRestriction]) -> TokenModel:
    """Turn chosen disequalities into token templates and conflicts.

    A disequality between the same parameter position of one operation is a
    self-conflicting token on that parameter; anything else becomes two
    tokens, one per side, that conflict with each other.
    """
    needs: dict[str, list[str]] = {}
    links: list[tuple[tuple[str, str], tuple[str, str]]] = []
    for r in chosen:
        for d in r.chosen.disequalities:
            sides = []
            for inst_id, pos in (d.left, d.right):
                inst = next(i for i in r.ops if i.id == inst_id)
                pname = inst.op.params[pos].name
                sides.append((inst.name, pname))
                if pname not in needs.setdefault(inst.name, []):
                    needs[inst.name].append(pname)
            links.append((sides[0], sides[1]))
    taken = {t.name for t in spec.tokens}
    names: dict[tuple[str, str], str] = {}
    tokens: dict[str, list[TokenTemplate]] = {}
    for op in sorted(needs):
        order = [p.name for p in spec.operation(op).params]
        for pname in sorted(needs[op], key=order.index):
            base = f"tok_{op}" if len(needs[op]) == 1 else f"tok_{op}_{pname}"
            name, n = base, 1
            while name in taken:
                n += 1
                name = f"{base}_{n}"
            taken.add(name)
            names[(op, pname)] = name
            tokens.setdefault(op, []).append(TokenTemplate(name, op, (pname,)))
    conflicts = symmetric((names[a], names[b]) for a, b in links)
    return TokenModel(list(chosen), tokens, conflicts)


def inject_tokens(spec: Specification, tm: TokenModel) -> Specification:
    """A copy of ``spec`` whose operations acquire the synthesized tokens."""
    decls = list(spec.tokens)
    ops = []
    for op in spec.operations:
        extra = []
        for t in tm.tokens.get(op.name, []):
            params = tuple(op.param(p) for p in t.params)
            decls.append(TokenDecl(t.name, tuple(Param(p.name, p.sort) for p in params)))
            extra.append(Acquire(t.name, tuple(Var(p.name, PARAM, sort=p.sort) for p in params)))
        ops.append(replace(op, acquires=op.acquires + tuple(extra)))
    return replace(spec, tokens=tuple(decls), operations=tuple(ops),
                   conflicts=spec.conflicts | tm.conflicts)


def synthesize(spec: Specification, checker, order=EVIDENCE, first=None,
               validate: bool = True) -> TokenModel:
    """Find tokens that make every failing stability check pass.

    ``checker`` is a :class:`cise.pipeline.Checker`. ``first`` optionally
    reorders the singleton candidates (the list is passed in and returned).
    Raises NoSolution when some pair has no stabilizing restriction, or when
    the tokenized specification still fails a stage-2 check.
    """
    results = run_plan(spec, checker, 2)
    stage1 = [r for r in results if r.task.stage == 1]
    if any(r.verdict != "pass" for r in stage1):
        raise ValueError("token synthesis needs a specification that passes stage 1")
    chosen: list[PairRestriction] = []
    failed = []
    calls = 0
    for r in stability_failures(results):
        pick, attempts, n = search_pair(spec, r.task, r.model, checker, order,
                                        checker.bounds, first)
        calls += n
        if pick is None:
            failed.append(r.task.op_names)
        else:
            chosen.append(PairRestriction(r.task.name, r.task.ops, pick, attempts))
    if failed:
        raise NoSolution(failed)
    tm = build_token_model(spec, chosen)
    tm.solver_calls = calls
    if validate:
        check_tokens(spec, tm, checker)
    return tm


def tokenized_results(spec: Specification, tm: TokenModel, checker):
    """Stage-2 results for ``spec`` with the tokens of ``tm`` injected."""
    results = run_plan(inject_tokens(spec, tm), checker, 2)
    return [r for r in results if r.task.stage == 2] if _stage1_ok(results) else results


def _stage1_ok(results) -> bool:
    return all(r.verdict == "pass" for r in results if r.task.stage == 1)


def check_tokens(spec: Specification, tm: TokenModel, checker):
    """Full stage-2 rerun with the tokens injected; NoSolution if anything fails."""
    results = tokenized_results(spec, tm, checker)
    bad = [r for r in results if r.verdict != "pass"]
    if bad:
        raise NoSolution([r.task.op_names for r in bad],
                         "with the synthesized tokens these checks still do not pass: "
                         + ", ".join(f"{r.task.name} ({r.verdict})" for r in bad))
    return results


# -- rendering --------------------------------------------------------------

def render_token_model(tm: TokenModel) -> str:
    lines = ["RESTRICTIONS"]
    if not tm.restrictions:
        lines.append("  none")
    for r in sorted(tm.restrictions, key=lambda r: (r.task, r.chosen.key)):
        lines.append(f"  {r.task}: {r.chosen.positions(r.ops)}  ({r.chosen.describe(r.ops)})")
        for att in r.attempts:
            lines.append(f"    tried {att.candidate.describe(r.ops)}: {att.reason} [{att.outcome}]")
    lines += ["", "TOKEN MODEL"]
    if not tm.tokens:
        lines.append("  none")
    for t in tm.templates():
        lines.append(f"  {t.op}: requires token {t.name}({', '.join(t.params)})")
    for a, b in tm.conflict_list():
        lines.append(f"  conflict: {a} {b}")
    return "\n".join(lines) + "\n"


def token_model_json(tm: TokenModel) -> dict:
    return {
        "restrictions": [
            {
                "task": r.task,
                "positions": [list(d.positions(r.ops)) for d in r.chosen.disequalities],
                "disequalities": [d.describe(r.ops) for d in r.chosen.disequalities],
                "attempts": [
                    {"candidate": a.candidate.describe(r.ops), "outcome": a.outcome,
                     "reason": a.reason, "solver_call": a.solver_call}
                    for a in r.attempts
                ],
            }
            for r in sorted(tm.restrictions, key=lambda r: (r.task, r.chosen.key))
        ],
        "tokens": {op: [{"name": t.name, "params": list(t.params)} for t in ts]
                   for op, ts in sorted(tm.tokens.items())},
        "conflicts": [list(p) for p in tm.conflict_list()],
        "solver_calls": tm.solver_calls,
    }
