"""
Splitting a flux into policies and a cycle
==========================================

Any nonnegative flux satisfying the conservation equations is a convex
combination of proper deterministic policy fluxes plus a leftover transition
cycle.  Here we build such a flux by hand and take it apart again.
"""

import numpy as np

import sspkit
from sspkit import Policy, SspInstance

# %%
# Two states with a free loop between them and a unit-cost exit from each.
inst = SspInstance.from_actions(
    2,
    [(1, 0.0, {2: 1.0}), (2, 0.0, {1: 1.0}), (1, 1.0, {}), (2, 1.0, {})],
    labels=["1>2", "2>1", "1>0", "2>0"],
)
exit_now = Policy({1: 3, 2: 4})
via_two = Policy({1: 1, 2: 4})

x = 0.3 * sspkit.evaluate_policy_flux(inst, exit_now) + 0.7 * sspkit.evaluate_policy_flux(inst, via_two)
x = x + np.array([0.5, 0.5, 0.0, 0.0])  # half a unit going round the loop
print("flux:", {lbl: float(v) for lbl, v in zip(inst.labels, x)})
print("conservation residual:", inst.D.T @ x - 1)

# %%
dec = sspkit.decompose_flux(inst, x)
for part in dec.parts:
    print(f"weight {part.weight:.3f}: policy {part.policy.as_dict()}, flux {part.flux}")
print("cycle left over:", dec.residual)
print("reconstruction error:", np.abs(dec.reconstruct() - x).max())

# %%
# The same on a random instance, mixing a deterministic and a randomized policy.
inst = sspkit.random_instance(8, 3, seed=1)
pols = [sspkit.construct_proper_policy(inst), sspkit.uniform_policy(inst)]
x = 0.5 * sspkit.evaluate_policy_flux(inst, pols[0]) + 0.5 * sspkit.evaluate_policy_flux(inst, pols[1])
dec = sspkit.decompose_flux(inst, x)
print(f"{len(dec.parts)} parts in {dec.rounds} rounds (support size {dec.support_size})")
print("weights:", np.round(dec.weights, 4), "sum", sum(dec.weights))
