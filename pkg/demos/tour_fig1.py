"""
Checking and solving a small stochastic instance
================================================

The ``fig1`` fixture has four states, seven actions and two negative costs.
We check that it is well posed, then solve it three ways.
"""

import numpy as np

import sspkit
from sspkit.support_graph import build

inst = sspkit.load_fixture("fig1")
for a in range(1, inst.m + 1):
    print(f"action {inst.label(a)}: state {inst.owner[a - 1]}, cost {inst.cost[a - 1]:+g}, next {dict(inst.trans[a - 1])}")

# %%
# Every state must be able to reach the target, and no loop of transitions
# may have negative total cost.  Both checks are graph/LP computations.
report = sspkit.validate_assumptions(inst)
print(report.as_dict())

g = build(inst)
print("state nodes:", len(g.states), "action nodes:", len(g.actions))

# %%
# A proper policy built from BFS layers toward the target gives finite values,
# which value iteration uses as its starting upper bound.
start = sspkit.construct_proper_policy(inst)
print("layered policy:", {s: inst.label(a) for s, a in start.as_dict().items()})
print("its values:", sspkit.evaluate_policy_values(inst, start))

# %%
# Value iteration, policy iteration and the flux LP all land on the same policy.
for method in ("vi", "pi", "lp"):
    res = sspkit.solve(inst, method)
    pol = {s: inst.label(a) for s, a in res.policy.as_dict().items()}
    print(f"{method}: V = {np.round(res.values, 9)}, policy {pol}, certified {res.certified}")

# %%
# The primal-dual method starts from the zero dual point, which is only
# feasible when every cost is nonnegative, so it declines this instance.
try:
    sspkit.solve(inst, "pd")
except sspkit.NegativeCosts as exc:
    print("pd:", exc)
