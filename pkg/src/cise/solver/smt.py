"""SMT-LIB2 backend: one child solver process per task, spoken to over stdin/stdout."""
from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess

from ..errors import BackendUnavailable, ProtocolError
from ..terms import (
    App, Binary, BoolLit, BoolSort, Expr, Forall, IntLit, IntSort, MapSort, Old, Select,
    Sort, Store, USort, Unary, Var, walk,
)
from .base import SolverVerdict
from .values import Elem, FunctionValue, MapValue, Model

ENV_VAR = "CISE_SMT_SOLVER"

_DEFAULT_ARGS = {"z3": ["-in", "-smt2"], "cvc5": ["--lang=smt2"], "cvc4": ["--lang=smt2"]}
_RESERVED_SORTS = {"Int", "Bool", "Real", "Array", "String", "RegLan"}


def solver_command(executable: str | None = None) -> list[str]:
    """Resolve the solver command line: explicit path, then $CISE_SMT_SOLVER, then z3."""
    if executable:
        cmd = [executable]
    elif os.environ.get(ENV_VAR):
        cmd = shlex.split(os.environ[ENV_VAR])
    else:
        cmd = ["z3"]
    if len(cmd) == 1:
        stem = os.path.basename(cmd[0]).split(".")[0].lower()
        for key, args in _DEFAULT_ARGS.items():
            if stem.startswith(key):
                cmd += args
                break
    return cmd


class SmtBackend:
    name = "smt"

    def __init__(self, command: list[str] | None = None):
        self.command = command or solver_command()

    def describe(self) -> str:
        return f"smt ({' '.join(self.command)})"

    def available(self) -> bool:
        return shutil.which(self.command[0]) is not None

    def check(self, task, timeout: float = 10.0) -> SolverVerdict:
        script, wanted = encode(task)
        out = self._run(script, timeout)
        if out is None:
            return SolverVerdict.unknown("timeout", backend="smt")
        return decode_reply(out, task, wanted)

    def _run(self, script: str, timeout: float) -> str | None:
        if not self.available():
            raise BackendUnavailable(f"solver executable {self.command[0]!r} not found")
        try:
            proc = subprocess.run(self.command, input=script, capture_output=True, text=True,
                                  timeout=timeout)
        except subprocess.TimeoutExpired:
            return None
        except OSError as exc:
            raise BackendUnavailable(str(exc)) from exc
        if not proc.stdout.strip():
            raise BackendUnavailable(f"no reply from solver: {proc.stderr.strip()[:200]}")
        return proc.stdout


# -- encoding ---------------------------------------------------------------

def quote(name: str) -> str:
    return f"|{name}|"


def sort_name(name: str) -> str:
    return quote(f"user.{name}" if name in _RESERVED_SORTS else name)


def smt_sort(s: Sort) -> str:
    if isinstance(s, IntSort):
        return "Int"
    if isinstance(s, BoolSort):
        return "Bool"
    if isinstance(s, USort):
        return sort_name(s.name)
    if isinstance(s, MapSort):
        return f"(Array {smt_sort(s.key)} {smt_sort(s.value)})"
    raise TypeError(s)


def fun_name(name: str) -> str:
    return quote(f"fun.{name}")


def bound_name(name: str) -> str:
    return quote(f"?{name}")


_SMT_OPS = {"+": "+", "-": "-", "*": "*", "==": "=", "<": "<", "<=": "<=", ">": ">",
            ">=": ">=", "&&": "and", "||": "or", "==>": "=>"}


def to_smt(e: Expr, bound: frozenset[str] = frozenset()) -> str:
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return bound_name(e.name) if e.name in bound else quote(e.name)
    if isinstance(e, Old):
        return to_smt(e.expr, bound)
    if isinstance(e, Unary):
        op = "-" if e.op == "-" else "not"
        return f"({op} {to_smt(e.operand, bound)})"
    if isinstance(e, Binary):
        a, b = to_smt(e.left, bound), to_smt(e.right, bound)
        if e.op == "!=":
            return f"(not (= {a} {b}))"
        return f"({_SMT_OPS[e.op]} {a} {b})"
    if isinstance(e, Select):
        return f"(select {to_smt(e.map, bound)} {to_smt(e.key, bound)})"
    if isinstance(e, Store):
        return f"(store {to_smt(e.map, bound)} {to_smt(e.key, bound)} {to_smt(e.value, bound)})"
    if isinstance(e, App):
        if not e.args:
            return fun_name(e.func)
        return f"({fun_name(e.func)} {' '.join(to_smt(a, bound) for a in e.args)})"
    if isinstance(e, Forall):
        inner = bound | {n for n, _ in e.binders}
        decls = " ".join(f"({bound_name(n)} {smt_sort(s)})" for n, s in e.binders)
        return f"(forall ({decls}) {to_smt(e.body, inner)})"
    raise TypeError(f"cannot encode {e!r}")


def _usorts_of(sort: Sort, out: set) -> None:
    if isinstance(sort, USort):
        out.add(sort.name)
    elif isinstance(sort, MapSort):
        _usorts_of(sort.key, out)
        _usorts_of(sort.value, out)


def encode(task):
    """Return the SMT-LIB2 script for ``task`` and the terms asked for on sat.

    The wanted list holds ``(term text, symbol, arg terms)``: plain symbols
    have no args; ground function applications carry their argument terms.
    """
    from ..terms import conjuncts
    decode = task.decode
    sorts: set[str] = set()
    lines = ["(set-option :produce-models true)", "(set-logic ALL)"]
    for entry in decode.values():
        _usorts_of(entry.sort, sorts)
        for a in entry.arg_sorts:
            _usorts_of(a, sorts)
    for n in walk(task.query):
        if isinstance(n, Forall):
            for _, s in n.binders:
                _usorts_of(s, sorts)
    lines += [f"(declare-sort {sort_name(s)} 0)" for s in sorted(sorts)]
    wanted = []
    for sym, entry in decode.items():
        if entry.kind == "function":
            args = " ".join(smt_sort(s) for s in entry.arg_sorts)
            lines.append(f"(declare-fun {fun_name(sym)} ({args}) {smt_sort(entry.sort)})")
            if not entry.arg_sorts:
                wanted.append((fun_name(sym), sym, ()))
        else:
            lines.append(f"(declare-fun {quote(sym)} () {smt_sort(entry.sort)})")
            wanted.append((quote(sym), sym, ()))
    seen = set()
    for n in walk(task.query):
        if isinstance(n, App) and n.args and not _has_bound(n):
            text = to_smt(n)
            if text not in seen:
                seen.add(text)
                wanted.append((text, n.func, tuple(to_smt(a) for a in n.args)))
    for c in conjuncts(task.query):
        lines.append(f"(assert {to_smt(c)})")
    lines.append("(check-sat)")
    terms = " ".join(w[0] for w in wanted)
    if terms:
        lines.append(f"(get-value ({terms}))")
    lines.append("(get-model)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n", wanted


def _has_bound(app: App) -> bool:
    bound_free = True
    for n in walk(app):
        if isinstance(n, Var) and n.kind == "bound":
            bound_free = False
    return not bound_free


# -- replies ----------------------------------------------------------------

_TOKEN = re.compile(r'\s+|;[^\n]*|\|[^|]*\||"(?:[^"]|"")*"|[()]|[^\s()|";]+')


def read_sexps(text: str) -> list:
    """Parse every s-expression in ``text``; quoted symbols lose their bars."""
    stack: list[list] = [[]]
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if tok[0].isspace() or tok[0] == ";":
            continue
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ProtocolError("unbalanced ')' in solver reply")
            done = stack.pop()
            stack[-1].append(done)
        elif tok[0] == "|":
            stack[-1].append(Sym(tok[1:-1]))
        else:
            stack[-1].append(Sym(tok) if not tok[0] == '"' else tok)
    if len(stack) != 1:
        raise ProtocolError("unbalanced '(' in solver reply")
    return stack[0]


class Sym(str):
    """A symbol token (distinct from a string literal)."""


_UNIVERSE = re.compile(r";; universe for (\S+):[ \t]*\n((?:[ \t]*;;[ \t]+[^-\s][^\n]*\n)*)")


def universes(text: str) -> dict[str, list[str]]:
    """Element lists from z3's ``;; universe for S:`` comments, when present."""
    out = {}
    for m in _UNIVERSE.finditer(text):
        name = m.group(1).strip("|")
        if name.startswith("user.") and name[5:] in _RESERVED_SORTS:
            name = name[5:]
        elems = []
        for line in m.group(2).splitlines():
            elems += line.strip().lstrip(";").split()
        out[name] = [e.strip("|") for e in elems]
    return out


def decode_reply(text: str, task, wanted) -> SolverVerdict:
    items = read_sexps(text)
    status = None
    rest = []
    for i, item in enumerate(items):
        if isinstance(item, list) and item and item[0] == "error" and status is None:
            raise ProtocolError(f"solver error: {' '.join(map(str, item[1:]))}")
        if isinstance(item, str) and item in ("sat", "unsat", "unknown"):
            status = str(item)
            rest = items[i + 1:]
            break
    if status is None:
        raise ProtocolError(f"no check-sat answer in reply: {text[:200]!r}")
    if status == "unsat":
        return SolverVerdict.unsat(backend="smt")
    if status == "unknown":
        return SolverVerdict.unknown("incompleteness", backend="smt")
    if not wanted:
        return SolverVerdict.sat(Model({}, {}, bounded=False), backend="smt")
    if not rest or not isinstance(rest[0], list):
        raise ProtocolError("missing get-value reply")
    model_defs = rest[1] if len(rest) > 1 and isinstance(rest[1], list) else []
    return SolverVerdict.sat(_build_model(rest[0], task, wanted, universes(text), model_defs),
                             backend="smt")


class _Decoder:
    def __init__(self, univ: dict[str, list[str]], model_defs):
        self.index: dict[tuple[str, str], int] = {}
        self.univ = univ
        self.defs = {}
        for d in model_defs:
            if isinstance(d, list) and len(d) == 5 and d[0] == "define-fun":
                self.defs[str(d[1])] = d

    def elem(self, sort: str, atom: str) -> Elem:
        key = (sort, atom)
        if key not in self.index:
            self.index[key] = sum(1 for s, _ in self.index if s == sort)
        return Elem(sort, self.index[key])

    def value(self, sexp, sort: Sort):
        if isinstance(sort, IntSort):
            return self.integer(sexp)
        if isinstance(sort, BoolSort):
            if sexp in ("true", "false"):
                return sexp == "true"
            raise ProtocolError(f"expected a boolean, got {sexp!r}")
        if isinstance(sort, USort):
            if isinstance(sexp, str):
                return self.elem(sort.name, str(sexp))
            raise ProtocolError(f"expected an element of {sort}, got {sexp!r}")
        if isinstance(sort, MapSort):
            return self.array(sexp, sort)
        raise ProtocolError(f"unsupported sort {sort}")

    def integer(self, sexp) -> int:
        if isinstance(sexp, str):
            try:
                return int(sexp)
            except ValueError:
                raise ProtocolError(f"expected an integer, got {sexp!r}") from None
        if isinstance(sexp, list) and len(sexp) == 2 and sexp[0] == "-":
            return -self.integer(sexp[1])
        raise ProtocolError(f"expected an integer, got {sexp!r}")

    def array(self, sexp, sort: MapSort) -> MapValue:
        if isinstance(sexp, list) and len(sexp) == 2 and isinstance(sexp[0], list) \
                and sexp[0][:2] == ["as", "const"]:
            return MapValue(self.value(sexp[1], sort.value))
        if isinstance(sexp, list) and len(sexp) == 4 and sexp[0] == "store":
            base = self.array(sexp[1], sort)
            return base.store(self.value(sexp[2], sort.key), self.value(sexp[3], sort.value))
        if isinstance(sexp, list) and len(sexp) == 3 and sexp[0] == "lambda":
            (var, _), = sexp[1]
            return self._ite_map(sexp[2], str(var), sort)
        if isinstance(sexp, list) and len(sexp) == 3 and sexp[0] == "_" and sexp[1] == "as-array":
            d = self.defs.get(str(sexp[2]))
            if d is None:
                raise ProtocolError(f"no definition for {sexp[2]} in model")
            (var, _), = d[2]
            return self._ite_map(d[4], str(var), sort)
        raise ProtocolError(f"unsupported array value {sexp!r}")

    def _ite_map(self, body, var: str, sort: MapSort) -> MapValue:
        rows = []
        while isinstance(body, list) and len(body) == 4 and body[0] == "ite":
            cond = body[1]
            if not (isinstance(cond, list) and len(cond) == 3 and cond[0] == "="):
                raise ProtocolError(f"unsupported array condition {cond!r}")
            key = cond[2] if cond[1] == var else cond[1]
            rows.append((self.value(key, sort.key), self.value(body[2], sort.value)))
            body = body[3]
        m = MapValue(self.value(body, sort.value))
        for k, v in reversed(rows):
            m = m.store(k, v)
        return m


def _build_model(pairs, task, wanted, univ, model_defs) -> Model:
    dec = _Decoder(univ, model_defs)
    decode = task.decode
    by_text = {}
    for pair in pairs:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ProtocolError(f"malformed get-value entry {pair!r}")
        by_text[_render(pair[0])] = pair[1]
    assignments: dict = {}
    arg_values: dict[str, object] = {}
    rows: dict[str, list] = {}
    for text, sym, args in wanted:
        raw = by_text.get(_render(read_sexps(text)[0]))
        if raw is None:
            raise ProtocolError(f"solver did not report a value for {text}")
        if not args:
            entry = decode[sym]
            v = dec.value(raw, entry.sort)
            if entry.kind == "function":
                assignments[sym] = FunctionValue(v)
            else:
                assignments[sym] = v
                arg_values[quote(sym)] = v
            continue
        entry = decode[sym]
        arg_vals = []
        for a, s in zip(args, entry.arg_sorts):
            if a in arg_values:
                arg_vals.append(arg_values[a])
            else:
                arg_vals.append(dec.value(read_sexps(a)[0], s))
        rows.setdefault(sym, []).append((tuple(arg_vals), dec.value(raw, entry.sort)))
    for sym, entry in decode.items():
        if entry.kind == "function" and entry.arg_sorts:
            r = rows.get(sym, [])
            default = r[0][1] if r else _zero(entry.sort)
            assignments[sym] = FunctionValue(default, tuple(dict(r).items()))
    universe = {}
    for sort in {s for s, _ in dec.index} | set(univ):
        for atom in univ.get(sort, []):
            dec.elem(sort, atom)
        universe[sort] = max(1, sum(1 for s, _ in dec.index if s == sort))
    return Model(assignments, universe, bounded=False)


def _zero(sort: Sort):
    if isinstance(sort, IntSort):
        return 0
    if isinstance(sort, BoolSort):
        return False
    if isinstance(sort, USort):
        return Elem(sort.name, 0)
    return MapValue(_zero(sort.value))


def _render(sexp) -> str:
    if isinstance(sexp, list):
        return "(" + " ".join(_render(x) for x in sexp) + ")"
    return str(sexp)
