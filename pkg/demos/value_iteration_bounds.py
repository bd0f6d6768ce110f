"""
Value iteration from upper bounds
=================================

Value iteration here starts from the values of some proper policy and takes
a running minimum, so the iterates never increase and stay above the optimum.
"""

import numpy as np

import sspkit

inst = sspkit.load_fixture("coin")
res = sspkit.value_iteration(inst, M=[10.0], record=True)
print("coin iterates:", res.history["values"].ravel()[:8], "...")
print("converged to", res.values, "after", res.iterations, "iterates")

# %%
# On a random instance with mixed-sign costs, compare against the LP.
inst = sspkit.random_instance(10, 3, seed=3)
vi = sspkit.value_iteration(inst, record=True)
lp = sspkit.solve_lp(inst)
trace = vi.history["values"]
print("monotone:", bool(np.all(np.diff(trace, axis=0) <= 0)))
print("start bound M:", np.round(vi.history["M"], 3))
print("final values :", np.round(vi.values, 3))
print("LP values    :", np.round(lp.values, 3))
print("same policy:", vi.policy == lp.policy, "certified:", vi.certified)
