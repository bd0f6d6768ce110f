"""Value iteration, Howard policy iteration, direct LP and the primal-dual method.

Every solver returns a :class:`SolveResult` whose ``values`` are the exact
values of the returned deterministic policy, obtained by a final linear
solve, so results from different methods are directly comparable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import lp_core, support_graph
from .errors import (
    AssumptionViolated,
    ExtractionFailure,
    ImproperPolicy,
    NegativeCosts,
    NoConvergence,
    NoProperPolicy,
    NumericalFailure,
    PropernessLost,
    StallDetected,
    Unbounded,
)
from .evaluate import evaluate_policy_flux, evaluate_policy_values, is_proper
from .model import Policy, SspInstance

log = logging.getLogger(__name__)

TIGHT_TOLS = (1e-7, 1e-6, 1e-5)
CERTIFY_TOL = 1e-8
STRICT_TOL = 1e-9


@dataclass
class SolveResult:
    values: np.ndarray
    policy: Policy
    objective: float
    method: str
    iterations: int
    residual: float
    certified: bool
    history: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "values": {str(i): float(v) for i, v in enumerate(self.values, start=1)},
            "policy": {str(s): a for s, a in self.policy.as_dict().items()},
            "objective": float(self.objective),
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "certified": bool(self.certified),
        }


def require_assumptions(instance: SspInstance) -> lp_core.AssumptionReport:
    report = lp_core.validate_assumptions(instance)
    if not report.proper_exists:
        raise AssumptionViolated(f"states {sorted(report.dead_states)} cannot reach the target", report)
    if report.negative_cycle is not None:
        raise AssumptionViolated(
            f"negative cost transition cycle (cost {report.negative_cycle_cost:.6g})", report
        )
    return report


def bellman_residuals(instance: SspInstance, V) -> np.ndarray:
    """``c(a) + sum_j p(j|a) V(j) - V(owner(a))`` for every action."""
    V = np.asarray(V, dtype=float)
    return instance.c + instance.P @ V - V[instance.owner_index]


def certify(instance: SspInstance, policy: Policy, tol: float = CERTIFY_TOL) -> tuple[bool, np.ndarray]:
    """Optimality certificate: every reduced cost w.r.t. the policy's exact values is >= -tol."""
    V = evaluate_policy_values(instance, policy)
    cbar = bellman_residuals(instance, V)
    return bool(cbar.min(initial=0.0) >= -tol), V


def extract_policy(instance: SspInstance, V, tight_tol: float | None = None) -> Policy:
    """Layered proper policy inside the actions that are tight for ``V``.

    Without an explicit ``tight_tol`` the bands 1e-7, 1e-6 and 1e-5 are tried
    in turn.
    """
    resid = np.abs(bellman_residuals(instance, V))
    tols = TIGHT_TOLS if tight_tol is None else (tight_tol,)
    for t in tols:
        tight = [int(a) + 1 for a in np.flatnonzero(resid <= t)]
        try:
            return support_graph.construct_proper_policy(instance, tight)
        except NoProperPolicy as exc:
            log.debug("extraction failed at tight_tol=%g: %s", t, exc)
    raise ExtractionFailure(f"tight actions do not connect every state to the target (tol {tols[-1]:g})")


def _state_min(instance: SspInstance):
    order = np.argsort(instance.owner_index, kind="stable")
    starts = np.searchsorted(instance.owner_index[order], np.arange(instance.n))

    def reduce(q):
        return np.minimum.reduceat(q[order], starts)

    return reduce


def value_iteration(
    instance: SspInstance,
    M=None,
    stop_tol: float = 1e-9,
    max_iter: int = 1_000_000,
    assume_valid: bool = False,
    record: bool = False,
) -> SolveResult:
    """Value iteration from upper bounds ``M`` on the optimal values.

    ``V_1 = M`` and ``V_k = min(V_{k-1}, min_a c(a) + P V_{k-1})``, so the
    iterates never increase.  ``M`` defaults to the values of the layered
    proper policy.  After the sup-norm step falls below ``stop_tol`` a policy
    is extracted from the tight actions and evaluated exactly.
    """
    if not assume_valid:
        require_assumptions(instance)
    if M is None:
        M = evaluate_policy_values(instance, support_graph.construct_proper_policy(instance))
    M = np.asarray(M, dtype=float)
    if M.shape != (instance.n,) or not np.all(np.isfinite(M)):
        raise ValueError("M must be a finite vector over the states")
    state_min = _state_min(instance)
    c, P = instance.c, instance.P
    V = M.copy()
    trace = [V.copy()] if record else None
    delta = math.inf
    k = 1
    while k < max_iter:
        k += 1
        Vn = np.minimum(V, state_min(c + P @ V))
        delta = float(np.abs(Vn - V).max(initial=0.0))
        V = Vn
        if record:
            trace.append(V.copy())
        if delta < stop_tol:
            break
    converged = delta < stop_tol
    try:
        policy = extract_policy(instance, V)
        certified, exact = certify(instance, policy)
    except (ExtractionFailure, ImproperPolicy) as exc:
        raise NoConvergence(f"value iteration stopped after {k} iterates: {exc}") from exc
    if not converged:
        log.warning("value iteration hit max_iter=%d (last step %.3g)", max_iter, delta)
    scale = 1.0 + np.abs(M).max(initial=0.0)
    exceeds = bool(np.any(exact > M + 1e-9 * scale))
    if exceeds:
        log.warning("certified values exceed the initial bounds M")
    history = {"M": M, "last_step": delta, "converged": converged}
    if record:
        history["values"] = np.array(trace)
    return SolveResult(
        values=exact,
        policy=policy,
        objective=float(exact.sum()),
        method="vi",
        iterations=k,
        residual=float(np.abs(exact - V).max(initial=0.0)),
        certified=certified,
        history=history,
        extras={"exceeds_bound": exceeds, "iterate": V},
    )


def _policy_count(instance: SspInstance) -> int:
    total = 1
    for s in range(1, instance.n + 1):
        total *= max(1, len(instance.actions_of(s)))
        if total > 10**6:
            return 10**6
    return total


def policy_iteration(
    instance: SspInstance,
    initial: Policy | None = None,
    strict: bool = True,
    strict_tol: float = STRICT_TOL,
    max_iter: int | None = None,
    assume_valid: bool = False,
) -> SolveResult:
    """Howard's policy iteration over proper deterministic policies.

    Each round switches every state that has an action of reduced cost below
    ``-strict_tol`` to its most negative one (lowest id on ties).
    ``strict=False`` is a test mode that also swaps onto zero reduced-cost
    actions; it can lose properness, which raises :class:`PropernessLost`.
    """
    if not assume_valid:
        require_assumptions(instance)
    policy = initial if initial is not None else support_graph.construct_proper_policy(instance)
    if not policy.is_deterministic:
        raise ValueError("policy iteration needs a deterministic initial policy")
    if not is_proper(instance, policy):
        raise ImproperPolicy("initial policy is not proper")
    if max_iter is None:
        max_iter = _policy_count(instance) + 1
    V = evaluate_policy_values(instance, policy)
    objectives = [float(V.sum())]
    policies = [policy]
    rounds = 0
    while True:
        cbar = bellman_residuals(instance, V)
        choice = policy.as_dict()
        changed = False
        for s in range(1, instance.n + 1):
            cur = choice[s]
            if strict:
                cand = [a for a in instance.actions_of(s) if cbar[a - 1] < -strict_tol]
            else:
                cand = [a for a in instance.actions_of(s) if a != cur and cbar[a - 1] <= strict_tol]
            if cand:
                best = min(cand, key=lambda a: (cbar[a - 1], a))
                if best != cur:
                    choice[s] = best
                    changed = True
        if not changed:
            break
        rounds += 1
        if rounds > max_iter:
            raise NoConvergence(f"policy iteration exceeded {max_iter} rounds")
        new = Policy(choice)
        if not is_proper(instance, new):
            raise PropernessLost(f"round {rounds} produced an improper policy", policy=new, iteration=rounds)
        V_new = evaluate_policy_values(instance, new)
        obj = float(V_new.sum())
        if strict and not obj < objectives[-1]:
            raise NumericalFailure(f"objective did not decrease ({objectives[-1]!r} -> {obj!r})")
        policy, V = new, V_new
        objectives.append(obj)
        policies.append(policy)
    certified = bool(cbar.min(initial=0.0) >= -CERTIFY_TOL)
    return SolveResult(
        values=V,
        policy=policy,
        objective=float(V.sum()),
        method="pi",
        iterations=rounds,
        residual=float(max(0.0, -cbar.min(initial=0.0))),
        certified=certified,
        history={"objectives": objectives, "policies": policies},
    )


def solve_lp(
    instance: SspInstance,
    warm_start: bool = False,
    rule: str = "dantzig",
    assume_valid: bool = False,
) -> SolveResult:
    """Solve the flux LP with all-ones right-hand side; its dual is the value vector.

    ``warm_start`` starts the simplex from the basis of the layered proper
    policy (simple policy iteration) instead of running phase one.
    """
    if not assume_valid:
        require_assumptions(instance)
    lp = lp_core.assemble_flux_lp(instance, "ones")
    basis = None
    if warm_start:
        start = support_graph.construct_proper_policy(instance)
        basis = [start.action(s) - 1 for s in range(1, instance.n + 1)]
    sol = lp_core.solve(lp, starting_basis=basis, rule=rule)
    if sol.status == "unbounded":
        raise Unbounded("flux LP is unbounded: a negative transition cycle went undetected")
    if sol.status != "optimal":
        raise AssumptionViolated("flux LP is infeasible: no proper policy")
    policy = extract_policy(instance, sol.y)
    certified, exact = certify(instance, policy)
    return SolveResult(
        values=exact,
        policy=policy,
        objective=float(exact.sum()),
        method="lp",
        iterations=sol.iterations,
        residual=float(np.abs(exact - sol.y).max(initial=0.0)),
        certified=certified,
        extras={"lp_solution": sol, "lp": lp},
    )


@dataclass
class MaxProbResult:
    """Restricted-primal optimum: flux on allowed actions plus escape flux.

    ``values`` is the per-state probability of having to escape, which is also
    the optimal solution of the dual restricted problem.
    """

    x: np.ndarray
    z: np.ndarray
    prob_deficit: float
    values: np.ndarray
    policy: Policy
    escapes: set
    iterations: int


def maxprob_instance(instance: SspInstance, allowed) -> tuple[SspInstance, list[int]]:
    """Allowed actions at cost 0 plus a unit-cost sure escape per state (ids ``k+1..k+n``)."""
    keep = sorted(set(allowed))
    n = instance.n
    aux = SspInstance(
        n=n,
        owner=tuple(instance.owner[a - 1] for a in keep) + tuple(range(1, n + 1)),
        trans=tuple(instance.trans[a - 1] for a in keep) + ((),) * n,
        cost=(0.0,) * len(keep) + (1.0,) * n,
    )
    return aux, keep


def maxprob(instance: SspInstance, allowed, backend: str = "pi", initial: Policy | None = None) -> MaxProbResult:
    """Maximize the probability of reaching 0 using only ``allowed`` actions.

    ``initial`` (a possibly partial policy on original ids) warm-starts the
    policy-iteration backend; states whose action is not allowed start on
    their escape.
    """
    aux, keep = maxprob_instance(instance, allowed)
    k = len(keep)
    pos = {a: i + 1 for i, a in enumerate(keep)}
    if backend == "pi":
        start = {s: k + s for s in range(1, instance.n + 1)}
        if initial is not None:
            for s, w in initial.weights.items():
                a = next(iter(w))
                if len(w) == 1 and a in pos:
                    start[s] = pos[a]
        start_policy = Policy(start)
        if not is_proper(aux, start_policy):
            start_policy = Policy({s: k + s for s in range(1, instance.n + 1)})
        res = policy_iteration(aux, initial=start_policy, assume_valid=True)
    elif backend == "lp":
        res = solve_lp(aux, assume_valid=True)
    else:
        raise ValueError(f"unknown MAXPROB backend {backend!r}")
    xa = evaluate_policy_flux(aux, res.policy, "ones")
    x = np.zeros(instance.m)
    if k:
        x[np.array(keep) - 1] = xa[:k]
    z = xa[k:]
    chosen = res.policy.as_dict()
    escapes = {s for s, a in chosen.items() if a > k}
    policy = Policy({s: keep[a - 1] for s, a in chosen.items() if a <= k})
    return MaxProbResult(
        x=x,
        z=z,
        prob_deficit=float(z.sum()),
        values=np.clip(res.values, 0.0, 1.0),
        policy=policy,
        escapes=escapes,
        iterations=res.iterations,
    )


def primal_dual(
    instance: SspInstance,
    tight_tol: float = 1e-9,
    deficit_tol: float = 1e-9,
    max_iter: int | None = None,
    backend: str = "pi",
    assume_valid: bool = False,
) -> SolveResult:
    """Primal-dual method for nonnegative costs (a stochastic Dijkstra).

    Starting from the dual point 0, each round solves MAXPROB on the tight
    actions.  Zero deficit means the tight actions already carry an optimal
    proper policy.  Otherwise the escape probabilities give an improving dual
    direction and the step is the largest keeping ``(J - P) y <= c``.
    """
    c, D = instance.c, instance.D
    if np.any(c < 0):
        bad = [int(a) + 1 for a in np.flatnonzero(c < 0)]
        raise NegativeCosts(f"primal-dual needs nonnegative costs; actions {bad} are negative")
    if not assume_valid:
        require_assumptions(instance)
    if max_iter is None:
        max_iter = 20 * (instance.m + instance.n) + 100
    cscale = 1.0 + np.abs(c)
    ybar = np.zeros(instance.n)
    trajectory = [ybar.copy()]
    settled_at: dict[int, int] = {}
    steps = []
    max_violation = 0.0
    mp = None
    for it in range(1, max_iter + 1):
        slack = c - D @ ybar
        tight = slack <= tight_tol * cscale
        allowed = [int(a) + 1 for a in np.flatnonzero(tight)]
        mp = maxprob(instance, allowed, backend=backend, initial=mp.policy if mp else None)
        for s in range(1, instance.n + 1):
            if mp.values[s - 1] <= deficit_tol and s not in settled_at:
                settled_at[s] = it
        if mp.prob_deficit <= deficit_tol:
            break
        yhat = mp.values
        g = D @ yhat
        cand = (~tight) & (g > 1e-12)
        if not np.any(cand):
            raise StallDetected("no blocking constraint for the dual step")
        eps = float(np.min(slack[cand] / g[cand]))
        ybar = ybar + eps * yhat
        max_violation = max(max_violation, float((D @ ybar - c).max(initial=0.0)))
        steps.append(eps)
        trajectory.append(ybar.copy())
    else:
        raise NoConvergence(f"primal-dual exceeded {max_iter} rounds")
    policy = mp.policy
    certified, exact = certify(instance, policy)
    return SolveResult(
        values=exact,
        policy=policy,
        objective=float(exact.sum()),
        method="pd",
        iterations=it,
        residual=float(np.abs(exact - ybar).max(initial=0.0)),
        certified=certified,
        history={
            "ybar": np.array(trajectory),
            "steps": steps,
            "settled_at": settled_at,
            "max_dual_violation": max_violation,
        },
        extras={"ybar": ybar},
    )


METHODS = {
    "vi": value_iteration,
    "pi": policy_iteration,
    "lp": solve_lp,
    "pd": primal_dual,
}


def solve(instance: SspInstance, method: str = "lp", **kwargs) -> SolveResult:
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return fn(instance, **kwargs)
