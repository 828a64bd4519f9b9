"""Render expressions and whole specifications back to DSL text."""
from __future__ import annotations

from .spec import Specification, conflict_pairs
from .terms import (
    App, Binary, BoolLit, Expr, Forall, IntLit, Old, Select, Store, Unary, Var,
)

_LEVEL = {"==>": 1, "||": 2, "&&": 3, "==": 5, "!=": 5, "<": 5, "<=": 5, ">": 5,
          ">=": 5, "+": 6, "-": 6, "*": 7}
_NOT, _NEG, _POSTFIX, _ATOM = 4, 8, 9, 10


def level(e: Expr) -> int:
    if isinstance(e, Binary):
        return _LEVEL[e.op]
    if isinstance(e, Unary):
        return _NOT if e.op == "!" else _NEG
    if isinstance(e, IntLit) and e.value < 0:
        return _NEG
    if isinstance(e, (Select, Store)):
        return _POSTFIX
    return _ATOM


def render_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Old):
        return f"old({render_expr(e.expr)})"
    if isinstance(e, App):
        return f"{e.func}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, Forall):
        bs = ", ".join(f"{n}: {s}" for n, s in e.binders)
        return f"(forall {bs} :: {render_expr(e.body)})"
    if isinstance(e, Select):
        return f"{_wrap(e.map, _POSTFIX)}[{render_expr(e.key)}]"
    if isinstance(e, Store):
        return f"{_wrap(e.map, _POSTFIX)}[{render_expr(e.key)} := {render_expr(e.value)}]"
    if isinstance(e, Unary):
        if e.op == "-" and isinstance(e.operand, IntLit) and e.operand.value >= 0:
            # "-3" would read back as a negative literal
            return f"-({e.operand.value})"
        if e.op == "!":
            # parenthesize anything looser than a postfix term for readability
            return f"!{_wrap(e.operand, _POSTFIX)}"
        return f"{e.op}{_wrap(e.operand, level(e))}"
    if isinstance(e, Binary):
        lvl = _LEVEL[e.op]
        if e.op == "==>":
            left, right = lvl + 1, lvl
        elif lvl == 5:
            left = right = lvl + 1
        else:
            left, right = lvl, lvl + 1
        return f"{_wrap(e.left, left)} {e.op} {_wrap(e.right, right)}"
    raise TypeError(f"cannot render {e!r}")


def _wrap(e: Expr, need: int) -> str:
    text = render_expr(e)
    if level(e) < need:
        return f"({text})"
    return text


def render_spec(spec: Specification) -> str:
    out: list[str] = ["@init"]
    out += [f"type {s};" for s in spec.sorts]
    for f in spec.functions:
        args = ", ".join(str(s) for s in f.arg_sorts)
        out.append(f"function {f.name}({args}): {f.result};")
    out += [f"axiom {render_expr(a.expr)};" for a in spec.axioms]
    out.append("")
    out.append("@variable")
    out += [f"var {v.name}: {v.sort};" for v in spec.variables]
    out.append("")
    out.append("@equals")
    for d in spec.equals:
        out.append(f"equals({d.left}: {d.sort}, {d.right}: {d.sort}) := {render_expr(d.body)};")
    if spec.tokens:
        out.append("")
        out.append("@tokens")
        for t in spec.tokens:
            ps = ", ".join(f"{p.name}: {p.sort}" for p in t.params)
            out.append(f"token {t.name}({ps});")
        out += [f"conflict {a} {b};" for a, b in conflict_pairs(spec)]
    out.append("")
    out.append("@invariant")
    out.append(f"{render_expr(spec.invariant.expr)};")
    out.append("")
    out.append("@operations")
    for op in spec.operations:
        ps = ", ".join(f"{p.name}: {p.sort}" for p in op.params)
        out.append(f"operation {op.name}({ps})")
        out += [f"  requires {render_expr(c.expr)};" for c in op.requires]
        out += [f"  ensures {render_expr(c.expr)};" for c in op.ensures]
        for a in op.acquires:
            out.append(f"  acquires {a.token}({', '.join(render_expr(x) for x in a.args)});")
    return "\n".join(out) + "\n"
