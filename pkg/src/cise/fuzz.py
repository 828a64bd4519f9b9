"""Random small specifications for property testing.

Every generated text parses. State is two ints ``x``, ``y`` and a bool
``f``; operations take up to two int parameters, have comparison
preconditions and functional ensures, and may acquire a self-conflicting
token on their first parameter.
"""
from __future__ import annotations

import random

INT_VARS = ("x", "y")


def _int_atom(rng: random.Random, params, old: bool) -> str:
    pool = [f"old({v})" if old else v for v in INT_VARS] + list(params)
    pool.append(str(rng.randint(-1, 2)))
    return rng.choice(pool)


def _int_expr(rng: random.Random, params, old: bool) -> str:
    a = _int_atom(rng, params, old)
    if rng.random() < 0.5:
        return a
    op = rng.choice(["+", "-"])
    return f"{a} {op} {_int_atom(rng, params, old)}"


def _cmp(rng: random.Random, params) -> str:
    op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
    return f"{_int_expr(rng, params, False)} {op} {_int_atom(rng, params, False)}"


def _bool_expr(rng: random.Random, params) -> str:
    r = rng.random()
    if r < 0.15:
        return rng.choice(["f", "!f"])
    if r < 0.3:
        return f"f ==> {_cmp(rng, params)}"
    return _cmp(rng, params)


def random_spec(rng: random.Random, max_ops: int = 3) -> str:
    lines = ["@variable", "var x: int;", "var y: int;", "var f: bool;", ""]
    n_ops = rng.randint(1, max_ops)
    ops = []
    uses_token = False
    for k in range(n_ops):
        params = [f"p{k}{i}" for i in range(rng.randint(0, 2))]
        body = [f"operation op{k}({', '.join(p + ': int' for p in params)})"]
        for _ in range(rng.randint(0, 2)):
            body.append(f"  requires {_bool_expr(rng, params)};")
        targets = rng.sample(["x", "y", "f"], rng.randint(0, 2))
        if not targets:
            body.append("  ensures true;")
        for v in targets:
            if v == "f":
                rhs = rng.choice(["true", "false", "(!old(f))", "old(f)"])
            else:
                rhs = _int_expr(rng, params, True)
            body.append(f"  ensures {v} == {rhs};")
        if params and rng.random() < 0.3:
            body.append(f"  acquires t({params[0]});")
            uses_token = True
        ops.append("\n".join(body))
    if uses_token:
        lines += ["@tokens", "token t(a: int);", "conflict t t;", ""]
    invariant = rng.choice(["true", "x >= 0", "x <= y", "x >= 0 && y >= 0", "f ==> x > 0",
                            "x + y <= 2"])
    lines += ["@invariant", f"{invariant};", "", "@operations"]
    lines += ops
    return "\n".join(lines) + "\n"


def corpus(seed: int, n: int, max_ops: int = 3) -> list[str]:
    rng = random.Random(seed)
    return [random_spec(rng, max_ops) for _ in range(n)]
