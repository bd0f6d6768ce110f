"""
Why policy iteration only switches on strictly negative reduced costs
=====================================================================

On the ``fig2`` fixture every state can step straight to the target.  Starting
from that policy, switching only on strictly improving actions reaches the
optimum.  Also accepting zero reduced-cost actions produces a policy that cycles
forever among states 1, 2 and 3.
"""

import sspkit
from sspkit import Policy

inst = sspkit.load_fixture("fig2")
direct = Policy({1: 1, 2: 2, 3: 3, 4: 4})

# %%
# Reduced costs c(a) + V(next) - V(state) relative to the direct policy.
cbar = sspkit.reduced_costs(inst, direct)
for a in range(1, inst.m + 1):
    print(f"action {a} ({inst.label(a)}): reduced cost {cbar[a - 1]:+g}")

# %%
# Strict rule: converges, objective strictly decreasing.
res = sspkit.policy_iteration(inst, initial=direct)
print("objectives:", res.history["objectives"])
print("optimal values:", res.values)

# %%
# Non-strict rule: after the first round all remaining loop arcs have reduced
# cost zero; taking them all at once closes the loop 1 -> 2 -> 3 -> 1.
try:
    sspkit.policy_iteration(inst, initial=direct, strict=False)
except sspkit.PropernessLost as exc:
    print(f"round {exc.iteration}: {exc.policy.as_dict()}")
    print("proper?", sspkit.is_proper(inst, exc.policy))
