"""Static checks for replicated-application specifications under causal consistency.

Typical use::

    from cise import parse_file, Checker, FiniteBackend, verify, render_text
    spec = parse_file("bank.spec")
    report = verify(spec, Checker(FiniteBackend()))
    print(render_text(report))
"""
from importlib.resources import files as _files

from .errors import (
    BackendUnavailable, DuplicateDefinition, IllFormed, MissingSection, NoSolution,
    ProtocolError, ReplayMismatch, SortError, SpecError, SpecSyntaxError, UnassignedSymbol,
    UnresolvedName,
)
from .parser import parse_file, parse_spec
from .pipeline import Checker, run_plan, verify
from .reporting import Report, build_counterexample, render_json, render_text
from .solver import DomainBounds, FiniteBackend, SmtBackend, check, eval
from .spec import Specification, modified_vars
from .tokens import candidates, inject_tokens, render_token_model, synthesize
from .vcgen import CheckKind, plan

__all__ = [
    "BackendUnavailable", "DuplicateDefinition", "IllFormed", "MissingSection", "NoSolution",
    "ProtocolError", "ReplayMismatch", "SortError", "SpecError", "SpecSyntaxError",
    "UnassignedSymbol", "UnresolvedName", "parse_file", "parse_spec", "Checker", "run_plan",
    "verify", "Report", "build_counterexample", "render_json", "render_text", "DomainBounds",
    "FiniteBackend", "SmtBackend", "check", "eval", "Specification", "modified_vars",
    "candidates", "inject_tokens", "render_token_model", "synthesize", "CheckKind", "plan",
    "corpus_path", "corpus_names",
]


def corpus_path(name: str) -> str:
    """Path of a bundled example specification, e.g. ``corpus_path("bank_v2")``."""
    return str(_files("cise") / "corpus" / f"{name}.spec")


def corpus_names() -> list[str]:
    return sorted(p.name[:-5] for p in (_files("cise") / "corpus").iterdir()
                  if p.name.endswith(".spec"))
