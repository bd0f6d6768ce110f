"""Reproducible random SSP instances."""

from __future__ import annotations

import numpy as np

from . import lp_core
from .errors import GenerationFailure
from .model import SspInstance


def _draw(rng, n, actions_per_state, density, cost_range, nonneg, ensure, deterministic, decimals):
    lo, hi = cost_range
    order = rng.permutation(n) + 1
    owner, trans = [], []
    for t, s in enumerate(order):
        # the first action of every state leads somewhere strictly closer to 0
        closer = [0] + [int(v) for v in order[:t]]
        k = int(rng.integers(1, actions_per_state + 1))
        for i in range(k):
            if deterministic:
                succ = {int(rng.choice(closer))} if i == 0 else {int(rng.integers(0, n + 1))}
            else:
                succ = {int(j) for j in np.flatnonzero(rng.random(n + 1) < density)}
                if i == 0:
                    succ.add(int(rng.choice(closer)))
                if not succ:
                    succ.add(int(rng.integers(0, n + 1)))
            succ = sorted(succ)
            w = rng.uniform(0.2, 1.0, size=len(succ))
            w /= w.sum()
            owner.append(int(s))
            trans.append({j: float(p) for j, p in zip(succ, w) if j != 0})
    # group actions by state so ids read naturally
    idx = sorted(range(len(owner)), key=lambda a: owner[a])
    owner = [owner[a] for a in idx]
    trans = [trans[a] for a in idx]
    m = len(owner)
    if nonneg:
        cost = rng.uniform(0.0, max(hi, 0.0), size=m)
    elif ensure:
        # c = base + (J - P) phi with base >= 0 makes every transition cycle cost >= 0
        base = rng.uniform(0.0, (hi - lo) / 2, size=m)
        phi = rng.uniform(lo / 2, hi / 2, size=n)
        cost = np.array(
            [base[a] + phi[owner[a] - 1] - sum(p * phi[j - 1] for j, p in trans[a].items()) for a in range(m)]
        )
    else:
        cost = rng.uniform(lo, hi, size=m)
    if decimals is not None:
        cost = np.round(cost, decimals)
        if nonneg:
            cost = np.maximum(cost, 0.0)
    return SspInstance.from_actions(n, [(owner[a], float(cost[a]), trans[a]) for a in range(m)])


def random_instance(
    n: int,
    actions_per_state: int = 2,
    density: float = 0.3,
    cost_range: tuple[float, float] = (-10.0, 10.0),
    nonneg: bool = False,
    ensure_assumption1: bool = True,
    deterministic: bool = False,
    seed=None,
    decimals: int | None = None,
    max_retries: int = 50,
) -> SspInstance:
    """Random instance with 1..``actions_per_state`` actions per state.

    Every state gets one action stepping closer to the target in a random
    ordering, so the target is reachable from everywhere.  With
    ``ensure_assumption1`` mixed-sign costs are drawn as nonnegative costs
    shifted by a random state potential, and the result is checked with the
    negative-cycle LP; draws failing the check are rejected.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if actions_per_state < 1:
        raise ValueError("actions_per_state must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        inst = _draw(rng, n, actions_per_state, density, cost_range, nonneg, ensure_assumption1, deterministic, decimals)
        if not ensure_assumption1 or lp_core.validate_assumptions(inst).ok:
            return inst
    raise GenerationFailure(f"no instance satisfying the assumptions after {max_retries} draws")
