"""Exception hierarchy shared by the parser, checker and solver backends."""
from __future__ import annotations


class SpecError(Exception):
    """Base class for every error found in a specification file."""

    def __init__(self, message: str, span=None):
        self.span = span
        if span is not None:
            message = f"{span.line}:{span.column}: {message}"
        super().__init__(message)


class SpecSyntaxError(SpecError):
    def __init__(self, span, expected, found: str):
        self.expected = frozenset(expected)
        self.found = found
        wanted = ", ".join(sorted(self.expected)) or "nothing"
        super().__init__(f"syntax error: found {found!r}, expected one of: {wanted}", span)

    @property
    def line(self) -> int:
        return self.span.line

    @property
    def column(self) -> int:
        return self.span.column


class SortError(SpecError):
    def __init__(self, span, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"sort error: found {found}, expected {expected}", span)


class UnresolvedName(SpecError):
    def __init__(self, span, name: str):
        self.name = name
        super().__init__(f"unresolved name {name!r}", span)


class DuplicateDefinition(SpecError):
    def __init__(self, span, name: str):
        self.name = name
        super().__init__(f"duplicate definition of {name!r}", span)


class MissingSection(SpecError):
    def __init__(self, section: str, span=None):
        self.section = section
        super().__init__(f"missing section {section}", span)


class IllFormed(SpecError):
    """A clause that is well-sorted but violates a structural rule."""


class SolverError(Exception):
    pass


class BackendUnavailable(SolverError):
    pass


class ProtocolError(SolverError):
    pass


class UnassignedSymbol(Exception):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no value assigned to {name!r}")


class ReplayMismatch(Exception):
    """A model returned by a backend does not falsify the clause it should."""


class NoSolution(Exception):
    def __init__(self, pairs, message: str = ""):
        self.pairs = list(pairs)
        names = ", ".join(f"({a}, {b})" for a, b in self.pairs)
        super().__init__(message or f"no parameter restriction stabilizes {names}")
