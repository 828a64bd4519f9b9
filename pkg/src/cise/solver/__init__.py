"""Discharge verification tasks through the smt or finite backend."""
from .base import SAT, UNKNOWN, UNSAT, SolverVerdict
from .finite import FiniteBackend
from .smt import SmtBackend
from .values import DomainBounds, Elem, FunctionValue, MapValue, Model, eval

__all__ = ["SAT", "UNKNOWN", "UNSAT", "SolverVerdict", "FiniteBackend", "SmtBackend",
           "DomainBounds", "Elem", "FunctionValue", "MapValue", "Model", "eval", "check",
           "DEFAULT_TIMEOUT"]

DEFAULT_TIMEOUT = 10.0


def check(task, backend, timeout: float = DEFAULT_TIMEOUT) -> SolverVerdict:
    return backend.check(task, timeout)
