from __future__ import annotations

from dataclasses import dataclass

from .values import Model

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"


@dataclass
class SolverVerdict:
    status: str  # sat | unsat | unknown
    model: Model | None = None
    reason: str | None = None  # for unknown: "timeout" or "incompleteness"
    # set when the answer comes from bounded enumeration standing in for the smt backend
    bounded: bool = False
    backend: str = ""

    @classmethod
    def sat(cls, model: Model, **kw) -> "SolverVerdict":
        return cls(SAT, model=model, **kw)

    @classmethod
    def unsat(cls, **kw) -> "SolverVerdict":
        return cls(UNSAT, **kw)

    @classmethod
    def unknown(cls, reason: str, **kw) -> "SolverVerdict":
        return cls(UNKNOWN, reason=reason, **kw)

    @property
    def is_sat(self) -> bool:
        return self.status == SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == UNSAT

    @property
    def definite(self) -> bool:
        return self.status != UNKNOWN
