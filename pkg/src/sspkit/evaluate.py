"""Exact evaluation of stationary policies and flux decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import support_graph
from .errors import DecompositionFailure, ImproperPolicy, SingularSystem
from .lp_core import _rhs_vector
from .model import TOL, Decomposition, DecompositionPart, Policy, SspInstance

DROP_TOL = 1e-12


def _sources(instance: SspInstance, source) -> set[int]:
    if source in (None, "all", "ones"):
        return set(range(1, instance.n + 1))
    if np.isscalar(source):
        return {int(source)}
    return {int(s) for s in source}


def policy_graph(instance: SspInstance, policy: Policy, tol: float = TOL) -> support_graph.SupportGraph:
    """Support graph restricted to the actions the policy plays."""
    return support_graph.build(instance, policy.actions(), tol)


def is_proper(instance: SspInstance, policy: Policy, source="all", tol: float = TOL) -> bool:
    """True iff every state reachable from ``source`` under ``policy`` can still reach 0.

    For a stationary policy this is exactly finiteness of the occupancy
    series: the chain restricted to the reachable states is transient.
    """
    g = policy_graph(instance, policy, tol)
    reach = support_graph.reach_from(g, _sources(instance, source))
    return reach <= support_graph.reach_to_target(g)


@dataclass(frozen=True)
class PolicyLinearSystem:
    """``(I - P_S')^T y = rhs'`` over the states ``S'`` reachable from the rhs support."""

    states: list[int]
    P: np.ndarray
    rhs: np.ndarray

    def solve(self) -> np.ndarray:
        k = len(self.states)
        return _lu_solve((np.eye(k) - self.P).T, self.rhs)


def _lu_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return np.zeros(0)
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    if np.abs(np.diag(lu)).min() <= 1e-12 * max(np.abs(M).max(), 1e-300):
        raise SingularSystem("policy system is singular; properness and tolerance disagree")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def policy_system(instance: SspInstance, policy: Policy, rhs="ones", tol: float = TOL) -> PolicyLinearSystem:
    b = _rhs_vector(instance, rhs)
    if np.any(b < 0):
        raise ValueError("initial distribution must be nonnegative")
    sources = {i + 1 for i in np.flatnonzero(b > 0)}
    g = policy_graph(instance, policy, tol)
    reach = support_graph.reach_from(g, sources)
    if not reach <= support_graph.reach_to_target(g):
        raise ImproperPolicy("policy is not proper from the given initial distribution")
    states = sorted(reach - {0})
    idx = np.array(states, dtype=np.intp) - 1
    P_pi = policy.transition_matrix(instance)
    return PolicyLinearSystem(states, P_pi[np.ix_(idx, idx)], b[idx])


def state_occupancy(instance: SspInstance, policy: Policy, rhs="ones") -> np.ndarray:
    """Expected number of visits to each state before absorption."""
    system = policy_system(instance, policy, rhs)
    y = np.zeros(instance.n)
    if system.states:
        y[np.array(system.states) - 1] = system.solve()
    return y


def evaluate_policy_flux(instance: SspInstance, policy: Policy, rhs="ones") -> np.ndarray:
    """Total expected action usage ``x^Pi``; zero outside the reachable part.

    ``rhs`` is ``"ones"`` (all states, unscaled), a state id, or a vector.
    Randomized policies are handled through their weight matrix.
    """
    y = state_occupancy(instance, policy, rhs)
    return policy.matrix(instance).T @ y


def evaluate_policy_values(instance: SspInstance, policy: Policy) -> np.ndarray:
    """Values ``V`` solving ``(I - P_Pi) V = c_Pi``; needs properness from every state."""
    if not is_proper(instance, policy, "all"):
        raise ImproperPolicy("policy is not proper from every state")
    P_pi = policy.transition_matrix(instance)
    return _lu_solve(np.eye(instance.n) - P_pi, policy.cost_vector(instance))


def truncated_series_flux(instance: SspInstance, policy: Policy, y0="ones", K: int = 1000) -> np.ndarray:
    """Partial sum of per-period action probabilities over periods ``0..K``."""
    W = policy.matrix(instance)
    P = instance.P
    y = _rhs_vector(instance, y0).astype(float)
    total = np.zeros(instance.m)
    for _ in range(K + 1):
        xk = W.T @ y
        total += xk
        y = P.T @ xk
    return total


def reduced_costs(instance: SspInstance, policy: Policy) -> np.ndarray:
    """``c - (J - P) y`` with ``y`` the policy's values; zero on the policy's own actions."""
    y = evaluate_policy_values(instance, policy)
    return instance.c - instance.D @ y


def decompose_flux(
    instance: SspInstance,
    x,
    rhs="ones",
    tol: float = TOL,
    drop_tol: float = DROP_TOL,
    feas_tol: float = 1e-8,
) -> Decomposition:
    """Split a feasible flux into proper deterministic policy fluxes plus a transition cycle.

    Each round builds a layered proper policy inside the current support,
    removes the largest multiple of its flux that keeps the remainder
    nonnegative, and repeats.  At least one support action vanishes per
    round.
    """
    b = _rhs_vector(instance, rhs)
    x = np.asarray(x, dtype=float)
    scale = max(1.0, np.abs(x).max(initial=0.0))
    if x.shape != (instance.m,) or x.min(initial=0.0) < -feas_tol * scale:
        raise ValueError("flux must be a nonnegative vector over the actions")
    if np.any(b < 0) or not np.any(b > 0):
        raise ValueError("rhs must be a nonnegative, nonzero initial distribution")
    if np.abs(instance.D.T @ x - b).max() > feas_tol * scale:
        raise ValueError("flux does not satisfy the flux conservation equations")

    sources = {i + 1 for i in np.flatnonzero(b > 0)}
    r = np.where(x > drop_tol * scale, x, 0.0)
    support_size = int(np.count_nonzero(r))
    remaining = 1.0
    parts = []
    rounds = 0
    while remaining > 1e-12:
        rounds += 1
        if rounds > support_size:
            raise DecompositionFailure("support did not shrink; round limit exceeded")
        active = {int(a) + 1 for a in np.flatnonzero(r > 0)}
        g = support_graph.build(instance, active, tol)
        reach = support_graph.reach_from(g, sources)
        if not reach <= support_graph.reach_to_target(g):
            raise DecompositionFailure("some state reachable in the flux support cannot reach the target")
        # States outside the reachable part keep all their actions: the flux
        # does not depend on them, and this keeps the policy total when possible.
        outside = {a for a in range(1, instance.m + 1) if instance.owner[a - 1] not in reach}
        choice = support_graph.partial_proper_policy(instance, active | outside, tol)
        policy = Policy(choice)
        xp = evaluate_policy_flux(instance, policy, b)
        pos = xp > tol
        ratios = r[pos] / xp[pos]
        lam = float(ratios.min())
        if lam >= remaining * (1 - 1e-9):
            lam = remaining
        if lam <= 0:
            raise DecompositionFailure("policy flux leaves the flux support")
        hit = np.flatnonzero(pos)[ratios <= lam * (1 + 1e-9)]
        r = r - lam * xp
        r[hit] = 0.0
        r[r < drop_tol * scale] = 0.0
        remaining -= lam
        parts.append(DecompositionPart(lam, policy, xp))
    return Decomposition(parts, r, rounds=rounds, support_size=support_size)

