"""Recursive-descent parser and sort checker for ``.spec`` files.

Parsing and resolution run clause by clause: sections appear in a fixed
order, so every name a clause may mention has been declared by the time the
clause is read.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import (
    DuplicateDefinition, IllFormed, MissingSection, SortError, SpecSyntaxError,
    UnresolvedName,
)
from .lexer import Token, make_span, tokenize
from .spec import (
    Acquire, Clause, EqualsDef, FunctionDecl, Operation, Param, Specification,
    TokenDecl, modified_vars, symmetric,
)
from .terms import (
    ARITH_OPS, BOOL, BOUND, EQ_OPS, INT, ORDER_OPS, PARAM, STATE, App, Binary,
    BoolLit, Expr, Forall, IntLit, IntSort, MapSort, Old, Select,
    Sort, Span, Store, USort, Unary, Var,
)

_SECTION_ORDER = ("@init", "@variable", "@equals", "@tokens", "@invariant", "@operations")
_CMP_OPS = EQ_OPS + ORDER_OPS
_ATOM_START = {"integer", "identifier", "true", "false", "old", "(", "-"}


def parse_spec(source: str, origin: str = "<string>") -> Specification:
    """Parse and check ``source``; raise a :class:`SpecError` subclass on the first problem."""
    return _Parser(source, origin).parse()


def parse_file(path) -> Specification:
    with open(path, encoding="utf-8") as f:
        return parse_spec(f.read(), str(path))


@dataclass
class _Scope:
    """What a clause is allowed to mention."""
    state: dict[str, Sort] = field(default_factory=dict)
    params: dict[str, Sort] = field(default_factory=dict)
    allow_old: bool = False
    allow_forall: bool = False
    where: str = "expression"


class _Parser:
    def __init__(self, source: str, origin: str):
        self.source = source
        self.origin = origin
        self.tokens = tokenize(source)
        self.pos = 0
        # declarations collected so far
        self.sorts: list[str] = []
        self.functions: dict[str, FunctionDecl] = {}
        self.axioms: list[Clause] = []
        self.variables: dict[str, Sort] = {}
        self.equals: list[EqualsDef] = []
        self.token_decls: dict[str, TokenDecl] = {}
        self.conflicts: list[tuple[str, str]] = []
        self.invariant: Clause | None = None
        self.operations: list[Operation] = []

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "keyword", "section")

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def fail(self, expected) -> SpecSyntaxError:
        t = self.tok
        return SpecSyntaxError(t.span, expected, t.text or "end of input")

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        raise self.fail({text})

    def ident(self) -> Token:
        if self.tok.kind == "ident":
            return self.advance()
        raise self.fail({"identifier"})

    def span_from(self, start: Span) -> Span:
        prev = self.tokens[self.pos - 1] if self.pos else self.tok
        end = max(prev.span.end, start.start)
        return make_span(self.source, start.start, end)

    # -- sections -----------------------------------------------------------

    def parse(self) -> Specification:
        seen: list[str] = []
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "section":
                allowed = [s for s in _SECTION_ORDER
                           if not seen or _SECTION_ORDER.index(s) > _SECTION_ORDER.index(seen[-1])]
                raise self.fail(set(allowed))
            if t.text in seen:
                raise DuplicateDefinition(t.span, t.text)
            if seen and _SECTION_ORDER.index(t.text) < _SECTION_ORDER.index(seen[-1]):
                later = [s for s in _SECTION_ORDER if _SECTION_ORDER.index(s) > _SECTION_ORDER.index(seen[-1])]
                raise self.fail(set(later))
            self.advance()
            seen.append(t.text)
            getattr(self, "section_" + t.text[1:])()
        eof = self.tok.span
        if self.invariant is None:
            raise MissingSection("@invariant", eof)
        if "@operations" not in seen:
            raise MissingSection("@operations", eof)
        return Specification(
            sorts=tuple(self.sorts),
            functions=tuple(self.functions.values()),
            axioms=tuple(self.axioms),
            variables=tuple(Param(n, s) for n, s in self.variables.items()),
            equals=tuple(self.equals),
            invariant=self.invariant,
            operations=tuple(self.operations),
            tokens=tuple(self.token_decls.values()),
            conflicts=symmetric(self.conflicts),
            origin=self.origin,
        )

    def section_init(self) -> None:
        while True:
            if self.accept("type"):
                name = self.ident()
                if name.text in self.sorts:
                    raise DuplicateDefinition(name.span, name.text)
                self.sorts.append(name.text)
                self.expect(";")
            elif self.accept("function"):
                name = self.ident()
                if name.text in self.functions:
                    raise DuplicateDefinition(name.span, name.text)
                self.expect("(")
                args: list[Sort] = []
                if not self.at(")"):
                    args.append(self.sort())
                    while self.accept(","):
                        args.append(self.sort())
                self.expect(")")
                self.expect(":")
                result = self.sort()
                self.expect(";")
                self.functions[name.text] = FunctionDecl(name.text, tuple(args), result)
            elif self.at("axiom"):
                start = self.advance().span
                raw = self.expr()
                self.expect(";")
                e = self.check_bool(raw, _Scope(allow_forall=True, where="axiom"))
                self.axioms.append(Clause(e, self.span_from(start)))
            else:
                return

    def section_variable(self) -> None:
        while self.accept("var"):
            name = self.ident()
            if name.text in self.variables:
                raise DuplicateDefinition(name.span, name.text)
            self.expect(":")
            sort = self.sort()
            self.expect(";")
            self.variables[name.text] = sort

    def section_equals(self) -> None:
        while self.at("equals"):
            start = self.advance().span
            self.expect("(")
            a = self.ident()
            self.expect(":")
            sa_start = self.tok.span
            sa = self.sort()
            self.expect(",")
            b = self.ident()
            self.expect(":")
            sb_start = self.tok.span
            sb = self.sort()
            self.expect(")")
            self.expect(":=")
            raw = self.expr()
            self.expect(";")
            if sa != sb:
                raise SortError(self.span_from(sb_start), sb, sa)
            if a.text == b.text:
                raise DuplicateDefinition(b.span, b.text)
            if any(d.sort == sa for d in self.equals):
                raise DuplicateDefinition(self.span_from(sa_start), f"equals for {sa}")
            scope = _Scope(params={a.text: sa, b.text: sb}, allow_forall=True, where="equals")
            body = self.check_bool(raw, scope)
            self.equals.append(EqualsDef(sa, a.text, b.text, body, self.span_from(start)))

    def section_tokens(self) -> None:
        pending: list[tuple[Token, Token]] = []
        while True:
            if self.at("token"):
                start = self.advance().span
                name = self.ident()
                if name.text in self.token_decls:
                    raise DuplicateDefinition(name.span, name.text)
                self.expect("(")
                params = self.param_list()
                self.expect(")")
                self.expect(";")
                self.token_decls[name.text] = TokenDecl(name.text, params, self.span_from(start))
            elif self.accept("conflict"):
                a = self.ident()
                b = self.ident()
                self.expect(";")
                pending.append((a, b))
            else:
                break
        for a, b in pending:
            for t in (a, b):
                if t.text not in self.token_decls:
                    raise UnresolvedName(t.span, t.text)
            sa = tuple(p.sort for p in self.token_decls[a.text].params)
            sb = tuple(p.sort for p in self.token_decls[b.text].params)
            if sa != sb:
                raise SortError(b.span, _sig(sb), _sig(sa))
            self.conflicts.append((a.text, b.text))

    def section_invariant(self) -> None:
        start = self.tok.span
        raw = self.expr()
        span = self.span_from(start)
        self.expect(";")
        # quantifiers are needed here to state properties of whole maps
        e = self.check_bool(raw, _Scope(state=dict(self.variables), allow_forall=True,
                                         where="invariant"))
        self.invariant = Clause(e, span)

    def section_operations(self) -> None:
        if not self.at("operation"):
            raise self.fail({"operation"})
        while self.at("operation"):
            self.operation()

    def operation(self) -> None:
        start = self.expect("operation").span
        name = self.ident()
        if any(op.name == name.text for op in self.operations):
            raise DuplicateDefinition(name.span, name.text)
        self.expect("(")
        params = self.param_list()
        self.expect(")")
        for p, tok in zip(params, self._param_tokens):
            if p.name in self.variables:
                raise DuplicateDefinition(tok.span, p.name)
        pmap = {p.name: p.sort for p in params}
        requires: list[Clause] = []
        ensures: list[Clause] = []
        acquires: list[Acquire] = []
        expected = {"requires", "ensures", "acquires"}
        if not any(self.at(k) for k in expected):
            raise self.fail(expected)
        while any(self.at(k) for k in expected):
            kw = self.advance()
            if kw.text == "acquires":
                tname = self.ident()
                self.expect("(")
                raw_args: list[Expr] = []
                if not self.at(")"):
                    raw_args.append(self.expr())
                    while self.accept(","):
                        raw_args.append(self.expr())
                self.expect(")")
                self.expect(";")
                acquires.append(self.check_acquire(tname, raw_args, pmap, self.span_from(kw.span)))
                continue
            cstart = self.tok.span
            raw = self.expr()
            span = self.span_from(cstart)
            self.expect(";")
            if kw.text == "requires":
                scope = _Scope(state=dict(self.variables), params=pmap, where="requires")
                requires.append(Clause(self.check_bool(raw, scope), span))
            else:
                scope = _Scope(state=dict(self.variables), params=pmap, allow_old=True,
                               where="ensures")
                ensures.append(Clause(self.check_bool(raw, scope), span))
        op = Operation(name.text, params, tuple(requires), tuple(ensures), tuple(acquires),
                       self.span_from(start))
        if not modified_vars(op) and not op.ensures_is_true:
            raise IllFormed(f"ensures of {op.name} constrains no state variable", ensures[0].span)
        self.operations.append(op)

    def param_list(self) -> tuple[Param, ...]:
        params: list[Param] = []
        toks: list[Token] = []
        if self.tok.kind == "ident":
            while True:
                name = self.ident()
                if any(p.name == name.text for p in params):
                    raise DuplicateDefinition(name.span, name.text)
                self.expect(":")
                params.append(Param(name.text, self.sort()))
                toks.append(name)
                if not self.accept(","):
                    break
        self._param_tokens = toks
        return tuple(params)

    def sort(self) -> Sort:
        t = self.tok
        if self.accept("int"):
            return INT
        if self.accept("bool"):
            return BOOL
        if t.kind == "ident":
            self.advance()
            if t.text not in self.sorts:
                raise UnresolvedName(t.span, t.text)
            return USort(t.text)
        if self.accept("["):
            key = self.sort()
            self.expect("]")
            value = self.sort()
            if not isinstance(key, (IntSort, USort)):
                raise SortError(self.span_from(t.span), key, "int or a declared type as map key")
            return MapSort(key, value)
        raise self.fail({"int", "bool", "identifier", "["})

    # -- expressions --------------------------------------------------------
    # ==> < || < && < ! < comparisons < + - < * < unary -

    def expr(self) -> Expr:
        start = self.tok.span
        left = self.or_expr()
        if self.accept("==>"):
            right = self.expr()
            return Binary("==>", left, right, span=self.span_from(start))
        return left

    def or_expr(self) -> Expr:
        start = self.tok.span
        e = self.and_expr()
        while self.accept("||"):
            e = Binary("||", e, self.and_expr(), span=self.span_from(start))
        return e

    def and_expr(self) -> Expr:
        start = self.tok.span
        e = self.not_expr()
        while self.accept("&&"):
            e = Binary("&&", e, self.not_expr(), span=self.span_from(start))
        return e

    def not_expr(self) -> Expr:
        start = self.tok.span
        if self.accept("!"):
            return Unary("!", self.not_expr(), span=self.span_from(start))
        return self.cmp_expr()

    def cmp_expr(self) -> Expr:
        start = self.tok.span
        e = self.add_expr()
        if self.tok.kind == "op" and self.tok.text in _CMP_OPS:
            op = self.advance().text
            e = Binary(op, e, self.add_expr(), span=self.span_from(start))
        return e

    def add_expr(self) -> Expr:
        start = self.tok.span
        e = self.mul_expr()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            e = Binary(op, e, self.mul_expr(), span=self.span_from(start))
        return e

    def mul_expr(self) -> Expr:
        start = self.tok.span
        e = self.unary_expr()
        while self.accept("*"):
            e = Binary("*", e, self.unary_expr(), span=self.span_from(start))
        return e

    def unary_expr(self) -> Expr:
        start = self.tok.span
        if self.accept("-"):
            if self.tok.kind == "int":
                lit = self.advance()
                return self.postfix(IntLit(-int(lit.text), span=self.span_from(start)), start)
            return Unary("-", self.unary_expr(), span=self.span_from(start))
        return self.postfix(self.atom(), start)

    def postfix(self, e: Expr, start: Span) -> Expr:
        while self.accept("["):
            key = self.expr()
            if self.accept(":="):
                value = self.expr()
                self.expect("]")
                e = Store(e, key, value, span=self.span_from(start))
            else:
                self.expect("]")
                e = Select(e, key, span=self.span_from(start))
        return e

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), span=t.span)
        if self.accept("true"):
            return BoolLit(True, span=t.span)
        if self.accept("false"):
            return BoolLit(False, span=t.span)
        if self.accept("old"):
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Old(inner, span=self.span_from(t.span))
        if t.kind == "ident":
            self.advance()
            if self.accept("("):
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return App(t.text, tuple(args), span=self.span_from(t.span))
            return Var(t.text, "?", span=t.span)
        if self.accept("("):
            if self.accept("forall"):
                binders: list[tuple[str, Sort]] = []
                while True:
                    name = self.ident()
                    self.expect(":")
                    sstart = self.tok.span
                    s = self.sort()
                    if isinstance(s, MapSort):
                        raise SortError(self.span_from(sstart), s, "int, bool or a declared type")
                    binders.append((name.text, s))
                    if not self.accept(","):
                        break
                self.expect("::")
                body = self.expr()
                self.expect(")")
                return Forall(tuple(binders), body, span=self.span_from(t.span))
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.fail(_ATOM_START)

    # -- resolution and sort checking --------------------------------------

    def check_bool(self, raw: Expr, scope: _Scope) -> Expr:
        e = self.resolve(raw, scope, frozenset(), in_old=False)
        if e.sort != BOOL:
            raise SortError(raw.span, e.sort, BOOL)
        return e

    def check_acquire(self, name: Token, raw_args, pmap, span) -> Acquire:
        decl = self.token_decls.get(name.text)
        if decl is None:
            raise UnresolvedName(name.span, name.text)
        if len(raw_args) != len(decl.params):
            raise SortError(span, f"{len(raw_args)} arguments", f"{len(decl.params)} arguments")
        args = []
        for raw, p in zip(raw_args, decl.params):
            a = self.resolve(raw, _Scope(params=pmap, where="acquires"), frozenset(), False)
            if a.sort != p.sort:
                raise SortError(raw.span, a.sort, p.sort)
            args.append(a)
        return Acquire(name.text, tuple(args), span)

    def resolve(self, e: Expr, scope: _Scope, bound: frozenset, in_old: bool) -> Expr:
        r = self.resolve
        if isinstance(e, (IntLit, BoolLit)):
            return e
        if isinstance(e, Var):
            binder = _lookup_bound(bound, e.name)
            if binder is not None:
                return replace(e, kind=BOUND, sort=binder)
            if e.name in scope.params:
                return replace(e, kind=PARAM, sort=scope.params[e.name])
            if e.name in scope.state:
                return replace(e, kind=STATE, sort=scope.state[e.name])
            raise UnresolvedName(e.span, e.name)
        if isinstance(e, Old):
            if not scope.allow_old:
                raise IllFormed(f"old(...) is not allowed in {scope.where}", e.span)
            if in_old:
                raise IllFormed("old(...) may not be nested", e.span)
            inner = r(e.expr, scope, bound, True)
            return Old(inner, sort=inner.sort, span=e.span)
        if isinstance(e, Unary):
            x = r(e.operand, scope, bound, in_old)
            want = INT if e.op == "-" else BOOL
            _want(e.operand, x, want)
            return Unary(e.op, x, sort=want, span=e.span)
        if isinstance(e, Binary):
            a = r(e.left, scope, bound, in_old)
            b = r(e.right, scope, bound, in_old)
            if e.op in ARITH_OPS:
                _want(e.left, a, INT)
                _want(e.right, b, INT)
                sort = INT
            elif e.op in ORDER_OPS:
                _want(e.left, a, INT)
                _want(e.right, b, INT)
                sort = BOOL
            elif e.op in EQ_OPS:
                _want(e.right, b, a.sort)
                sort = BOOL
            else:
                _want(e.left, a, BOOL)
                _want(e.right, b, BOOL)
                sort = BOOL
            return Binary(e.op, a, b, sort=sort, span=e.span)
        if isinstance(e, (Select, Store)):
            m = r(e.map, scope, bound, in_old)
            if not isinstance(m.sort, MapSort):
                raise SortError(e.map.span, m.sort, "a map")
            k = r(e.key, scope, bound, in_old)
            _want(e.key, k, m.sort.key)
            if isinstance(e, Select):
                return Select(m, k, sort=m.sort.value, span=e.span)
            v = r(e.value, scope, bound, in_old)
            _want(e.value, v, m.sort.value)
            return Store(m, k, v, sort=m.sort, span=e.span)
        if isinstance(e, App):
            decl = self.functions.get(e.func)
            if decl is None:
                raise UnresolvedName(e.span, e.func)
            if len(e.args) != len(decl.arg_sorts):
                raise SortError(e.span, f"{len(e.args)} arguments", f"{len(decl.arg_sorts)} arguments")
            args = tuple(r(a, scope, bound, in_old) for a in e.args)
            for raw, a, s in zip(e.args, args, decl.arg_sorts):
                _want(raw, a, s)
            return App(e.func, args, sort=decl.result, span=e.span)
        if isinstance(e, Forall):
            if not scope.allow_forall:
                raise IllFormed(f"quantifiers are not allowed in {scope.where}", e.span)
            inner = bound
            for name, s in e.binders:
                inner = inner | {(name, s)}
                inner = frozenset((n, t) for n, t in inner if n != name or t == s)
            body = r(e.body, scope, inner, in_old)
            _want(e.body, body, BOOL)
            return Forall(e.binders, body, span=e.span)
        raise TypeError(f"unexpected node {e!r}")


def _lookup_bound(bound: frozenset, name: str) -> Sort | None:
    for n, s in bound:
        if n == name:
            return s
    return None


def _want(raw: Expr, typed: Expr, sort: Sort) -> None:
    if typed.sort != sort:
        raise SortError(raw.span, typed.sort, sort)


def _sig(sorts) -> str:
    return "(" + ", ".join(str(s) for s in sorts) + ")"
