"""``cise-verify``: parse a specification, run both check stages, optionally synthesize tokens."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .errors import BackendUnavailable, NoSolution, ReplayMismatch, SolverError, SpecError
from .parser import parse_file
from .pipeline import Checker, stability_failures, verify
from .reporting import render_json, render_text
from .solver import DEFAULT_TIMEOUT, FiniteBackend, SmtBackend
from .solver.smt import solver_command
from .solver.values import DomainBounds
from .tokens import synthesize, tokenized_results

EXIT_VERIFIED = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_UNKNOWN = 4


@dataclass
class RunConfig:
    path: str
    backend: str | None = None  # None: smt, falling back to finite if no solver is found
    cardinalities: dict[str, int] = field(default_factory=dict)
    int_range: tuple[int, int] = (-4, 4)
    timeout: float = DEFAULT_TIMEOUT
    stage: int = 2
    tokens: bool = False
    json_path: str | None = None
    solver: str | None = None

    def __post_init__(self):
        if self.tokens:
            self.stage = 2

    @property
    def bounds(self) -> DomainBounds:
        return DomainBounds.of(self.cardinalities, self.int_range)


def make_checker(config: RunConfig, err=None) -> Checker:
    err = err or sys.stderr
    finite = FiniteBackend(config.bounds)
    if config.backend == "finite":
        return Checker(finite, config.timeout)
    smt = SmtBackend(solver_command(config.solver))
    if not smt.available():
        if config.backend == "smt":
            raise BackendUnavailable(f"solver executable {smt.command[0]!r} not found")
        print(f"cise-verify: no SMT solver found ({smt.command[0]}); "
              f"using the finite backend", file=err)
        return Checker(finite, config.timeout)
    return Checker(smt, config.timeout, fallback=finite)


def run(config: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        spec = parse_file(config.path)
    except OSError as exc:
        print(f"cise-verify: cannot read {config.path}: {exc.strerror or exc}", file=err)
        return EXIT_INPUT
    except SpecError as exc:
        print(f"{config.path}:{exc}", file=err)
        return EXIT_INPUT
    try:
        checker = make_checker(config, err)
        report = verify(spec, checker, config.stage)
        if config.tokens and report.stage1_passed and stability_failures(report.results):
            try:
                tm = synthesize(spec, checker, validate=False)
                report.tokens = tm
                # failures after injection show up in the tokenized section
                report.tokenized = tokenized_results(spec, tm, checker)
            except NoSolution as exc:
                report.token_error = str(exc)
    except (SolverError, ReplayMismatch) as exc:
        print(f"cise-verify: backend error: {exc}", file=err)
        return EXIT_BACKEND
    out.write(render_text(report))
    if config.json_path:
        with open(config.json_path, "w", encoding="utf-8") as fh:
            fh.write(render_json(report))
    if report.token_error:
        return EXIT_FAILED
    return {"verified": EXIT_VERIFIED, "not verified": EXIT_FAILED,
            "unknown": EXIT_UNKNOWN}[report.summary]


def _cardinality(text: str) -> tuple[str, int]:
    name, sep, n = text.partition("=")
    if not sep or not name or not n.isdigit() or int(n) < 1:
        raise argparse.ArgumentTypeError(f"expected Sort=n with n >= 1, got {text!r}")
    return name, int(n)


def _int_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}") from None
    if not sep or lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"expected lo..hi with lo <= hi, got {text!r}")
    return lo_i, hi_i


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cise-verify",
        description="Check a specification for sequential safety, precondition stability "
                    "and commutativity, and optionally suggest concurrency tokens.")
    p.add_argument("path", help="specification file (.spec)")
    p.add_argument("--backend", choices=["smt", "finite"], default=None,
                   help="solver backend (default: smt, or finite if no solver is installed)")
    p.add_argument("--domain", action="append", type=_cardinality, default=[],
                   metavar="SORT=N", help="finite backend: size of an uninterpreted sort")
    p.add_argument("--int-range", type=_int_range, default=(-4, 4), metavar="LO..HI",
                   help="finite backend: integer range (default -4..4; "
                        "write --int-range=-2..2 for a negative bound)")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT,
                   help="seconds per solver task (default 10)")
    p.add_argument("--stage", type=int, choices=[1, 2], default=2,
                   help="stop after this stage")
    p.add_argument("--tokens", action="store_true",
                   help="synthesize tokens for failing stability checks")
    p.add_argument("--json", dest="json_path", metavar="PATH",
                   help="also write the report as JSON")
    p.add_argument("--solver", metavar="PATH",
                   help="SMT solver executable (overrides $CISE_SMT_SOLVER)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(args.path, args.backend, dict(args.domain), args.int_range,
                       args.timeout, args.stage, args.tokens, args.json_path, args.solver)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
