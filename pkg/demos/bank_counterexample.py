"""Walk through the bank example: a missing deposit precondition, then a
concurrency failure once it is added.

    python demos/bank_counterexample.py
"""
import cise
from cise.reporting import render_counterexample

checker = cise.Checker(cise.FiniteBackend())

print("== bank_v1: deposit accepts any amount")
v1 = cise.parse_file(cise.corpus_path("bank_v1"))
report = cise.verify(v1, checker)
for r in report.stage(1):
    print(f"{r.task.name:28} {r.verdict}")
    if r.counterexample:
        print("\n".join(render_counterexample(r.counterexample)))

print()
print("== bank_v2: deposit now requires amount > 0")
v2 = cise.parse_file(cise.corpus_path("bank_v2"))
report = cise.verify(v2, checker)
print("stage 1 passed:", report.stage1_passed)
for r in report.stage(2):
    if r.verdict == "fail":
        print(f"{r.task.name} fails:")
        print("\n".join(render_counterexample(r.counterexample)))

# Two withdrawals on the same account each see enough money at their origin
# replica, but after both effectors the balance goes negative.
print()
print("solver calls so far:", checker.calls)
