"""Run the two-stage check plan for one specification."""
from __future__ import annotations

from .reporting import FAIL, PASS, UNKNOWN, Report, TaskResult, build_counterexample
from .solver import DEFAULT_TIMEOUT, FiniteBackend, SolverVerdict
from .solver.values import DomainBounds
from .spec import Specification
from .vcgen import EXPECT_SAT, CheckKind, VerificationTask, passed, plan


class Checker:
    """Caching front end over a backend.

    When the primary backend answers unknown and a fallback is configured,
    the task is re-run on the fallback and the verdict marked bounded.
    """

    def __init__(self, backend, timeout: float = DEFAULT_TIMEOUT,
                 fallback: FiniteBackend | None = None):
        self.backend = backend
        self.timeout = timeout
        self.fallback = fallback
        self.calls = 0
        self._cache: dict[VerificationTask, SolverVerdict] = {}

    @property
    def bounds(self) -> DomainBounds:
        for be in (self.backend, self.fallback):
            if isinstance(be, FiniteBackend):
                return be.bounds
        return DomainBounds()

    def describe(self) -> str:
        text = self.backend.describe()
        if self.fallback is not None:
            text += f", falling back to {self.fallback.describe()} on unknown"
        return text

    def __call__(self, task: VerificationTask) -> SolverVerdict:
        got = self._cache.get(task)
        if got is None:
            got = self._solve(task)
            self._cache[task] = got
        return got

    def _solve(self, task: VerificationTask) -> SolverVerdict:
        self.calls += 1
        verdict = self.backend.check(task, self.timeout)
        if verdict.definite or self.fallback is None:
            return verdict
        alt = self.fallback.check(task, self.timeout)
        if not alt.definite:
            return verdict
        alt.bounded = True
        return alt


def result_for(task: VerificationTask, verdict: SolverVerdict, bounds: DomainBounds) -> TaskResult:
    if not verdict.definite:
        return TaskResult(task, verdict.status, UNKNOWN, verdict.reason, verdict.bounded)
    if task.kind == CheckKind.OPPOSITION:
        # unsat only means the pair never runs concurrently
        return TaskResult(task, verdict.status, PASS, None, verdict.bounded, None, verdict.model)
    ok = passed(task, verdict.status)
    cex = None
    if not ok:
        model = None if task.polarity == EXPECT_SAT else verdict.model
        cex = build_counterexample(task, model, bounds)
    return TaskResult(task, verdict.status, PASS if ok else FAIL, None, verdict.bounded, cex,
                      verdict.model)


def run_plan(spec: Specification, checker: Checker, stage: int = 2) -> list[TaskResult]:
    tasks = plan(spec, lambda t: checker(t).status, stage)
    return [result_for(t, checker(t), checker.bounds) for t in tasks]


def verify(spec: Specification, checker: Checker, stage: int = 2) -> Report:
    return Report(spec.origin, checker.describe(), run_plan(spec, checker, stage), stage)


def stability_failures(results) -> list[TaskResult]:
    return [r for r in results if r.task.kind == CheckKind.STABILITY and r.verdict == FAIL]
