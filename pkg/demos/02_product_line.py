"""
Composing memory models from features
=====================================

A model is a stack of layers over the sequentially consistent swap
predicate. Each layer may accept pairs its inner predicate rejects, never
the other way round. Here we print the swap tables of the catalog and
build a custom model that the catalog does not contain.
"""

from wmlab.explorer import explore
from wmlab.litmus import parse_litmus
from wmlab.machine import ReadAccess, WriteAccess
from wmlab.relaxation import Feature, all_products, compose, is_cross_thread_open

# Same-thread access pairs: may the second overtake the first?
pairs = {
    "W x; R y": (WriteAccess(0, "x", 1, 0), ReadAccess(0, "y", 1)),
    "W x; R x": (WriteAccess(0, "x", 1, 0), ReadAccess(0, "x", 1)),
    "W x; W y": (WriteAccess(0, "x", 1, 0), WriteAccess(0, "y", 1, 1)),
    "R x; R y": (ReadAccess(0, "x", 0), ReadAccess(0, "y", 1)),
    "R x; W y": (ReadAccess(0, "x", 0), WriteAccess(0, "y", 1, 1)),
}

models = all_products()
print(f"{'':<10}" + "".join(f"{m.label:>8}" for m in models))
for label, (a, b) in pairs.items():
    print(f"{label:<10}" + "".join(f"{str(m.may_swap(a, b)):>8}" for m in models))

for model in models:
    print(model.label, "layers:", [layer.value for layer in model.layers], "forwarding:", model.read_early)

# Read-read reordering alone is enough to break message passing, even
# though writes stay in order.
rr = compose({Feature.RR})
print("\ncustom model:", rr.label, "cross-thread open:", is_cross_thread_open(rr))

mp = parse_litmus(r"""
name MP
init x=0 flag=0
thread T0:
  write x 1
  write flag 1
thread T1:
  read flag -> r1
  read x -> r2
""")
for outcome in explore(mp, rr).outcomes:
    print("  ", outcome.describe(mp))
