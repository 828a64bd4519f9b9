"""Run every bundled spec through both backends and compare verdicts.

    python demos/finite_vs_smt.py
"""
import time

import cise
from cise import vcgen

finite = cise.FiniteBackend()
smt = cise.SmtBackend()
if not smt.available():
    raise SystemExit("no z3 executable found; install z3 or set CISE_SMT_SOLVER")

print(f"{'spec':18} {'tasks':>5} {'same':>5} {'finite s':>9} {'smt s':>7}")
for name in cise.corpus_names():
    spec = cise.parse_file(cise.corpus_path(name))
    tasks = vcgen.all_tasks(spec)
    t0 = time.perf_counter()
    a = [finite.check(t).status for t in tasks]
    t1 = time.perf_counter()
    b = [smt.check(t).status for t in tasks]
    t2 = time.perf_counter()
    same = sum(x == y for x, y in zip(a, b))
    print(f"{name:18} {len(tasks):5} {same:5} {t1 - t0:9.2f} {t2 - t1:7.2f}")
    for t, x, y in zip(tasks, a, b):
        if x != y:
            print(f"  {t.name}: finite={x} smt={y}")
