"""Infer a concurrency token for bank_v2 and check the tokenized result.

    python demos/token_synthesis.py [--exhaustive]
"""
import argparse

import cise
from cise.printer import render_spec
from cise.tokens import EVIDENCE, EXHAUSTIVE

ap = argparse.ArgumentParser()
ap.add_argument("--exhaustive", action="store_true",
                help="classify every candidate instead of stopping at the first one")
args = ap.parse_args()

spec = cise.parse_file(cise.corpus_path("bank_v2"))
checker = cise.Checker(cise.FiniteBackend())
tm = cise.synthesize(spec, checker, order=EXHAUSTIVE if args.exhaustive else EVIDENCE)
print(tm.render())
print(f"search used {tm.solver_calls} solver calls")

tokenized = cise.inject_tokens(spec, tm)
print("\n-- tokenized specification --")
print(render_spec(tokenized))

report = cise.verify(tokenized, checker)
print("rerun:", report.summary)

# The auction spec needs tokens on two different operations that conflict
# with each other.
auction = cise.parse_file(cise.corpus_path("auction"))
print()
print(cise.synthesize(auction, checker).render())

# A bounded counter cannot be fixed by parameter restrictions at all.
try:
    cise.synthesize(cise.parse_file(cise.corpus_path("bounded_counter")), checker)
except cise.NoSolution as exc:
    print("bounded_counter:", exc)
