"""
Store buffering across the model catalog
========================================

Two threads each write one flag and then read the other's flag. Under
sequential consistency at least one of them must see the other's write.
Once a write may sit in the queue while a later read of a different
location goes ahead, both threads can read 0.
"""

from wmlab.explorer import compare_models, explore, interleaving_oracle
from wmlab.litmus import parse_litmus
from wmlab.relaxation import all_products, product_model

sb = parse_litmus(r"""
name SB
init v=0 w=0
thread T0:
  write v 1
  read w -> r1
thread T1:
  write w 1
  read v -> r2
exists T0:r1=0 /\ T1:r2=0
""")

# Reference outcomes: every interleaving of the two programs, run directly.
for outcome in interleaving_oracle(sb):
    print("oracle:", outcome.describe(sb))

# The queue machine under the core product must agree with the oracle.
assert explore(sb, product_model("SC")).outcomes == interleaving_oracle(sb)

# Side by side over the whole catalog. The witness column says whether the
# exists-assertion found an outcome.
print(f"\n{'model':<8} {'outcomes':>8} {'states':>7}  0/0 reachable")
for row in compare_models(sb, all_products()):
    print(f"{row.model.label:<8} {row.outcome_count:>8} {row.states_visited:>7}  {row.witnesses[0]}")

# The extra TSO outcome.
extra = set(explore(sb, product_model("TSO")).outcomes) - set(interleaving_oracle(sb))
print("\nonly under TSO:", [o.describe(sb) for o in extra])
