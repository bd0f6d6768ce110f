"""Core data types: SSP instances, stationary policies and flux decompositions.

Indexing follows the mathematical convention: states are ``0..n`` with ``0``
the target, actions are ``1..m``.  The target state and its self-loop action
are never stored.  Every dense array uses 0-based positions, so action ``a``
lives at column/entry ``a - 1`` and state ``s`` at ``s - 1``.

Fluxes (vectors over actions) and value vectors (vectors over states) are
plain ``numpy`` float arrays of length ``m`` and ``n`` respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInstance

TOL = 1e-9

__all__ = [
    "TOL",
    "SspInstance",
    "Policy",
    "DecompositionPart",
    "Decomposition",
    "validate",
    "validate_policy",
    "to_s_ssp",
    "to_aux_ssp",
]


@dataclass(frozen=True)
class SspInstance:
    """A finite SSP instance.

    ``owner[a-1]`` is the state owning action ``a``; ``trans[a-1]`` is a tuple of
    ``(state, probability)`` pairs and ``cost[a-1]`` the action cost.  Mass not
    listed goes to the target.  An explicit ``(0, p)`` entry is tolerated and
    must agree with the row deficit.
    """

    n: int
    owner: tuple[int, ...]
    trans: tuple[tuple[tuple[int, float], ...], ...]
    cost: tuple[float, ...]
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_actions(cls, n: int, actions: Iterable, labels: Sequence[str] | None = None) -> "SspInstance":
        """Build from ``(owner, cost, {state: prob})`` triples, in action-id order.

        Entries for state 0 are dropped; the target receives the row deficit.
        """
        owner, trans, cost = [], [], []
        for s, c, to in actions:
            owner.append(int(s))
            cost.append(float(c))
            items = to.items() if isinstance(to, Mapping) else to
            trans.append(tuple(sorted((int(j), float(p)) for j, p in items if int(j) != 0)))
        return cls(
            n=int(n),
            owner=tuple(owner),
            trans=tuple(trans),
            cost=tuple(cost),
            labels=tuple(labels) if labels is not None else None,
        )

    @property
    def m(self) -> int:
        return len(self.owner)

    def label(self, a: int) -> str:
        if self.labels is not None:
            return self.labels[a - 1]
        return str(a)

    def action_id(self, label: str) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label) + 1

    def actions_of(self, s: int) -> list[int]:
        return self._actions_by_state[s]

    @cached_property
    def _actions_by_state(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {s: [] for s in range(1, self.n + 1)}
        for a, s in enumerate(self.owner, start=1):
            out.setdefault(s, []).append(a)
        return out

    def successors(self, a: int, tol: float = TOL) -> list[int]:
        """States reached with probability > tol, including 0 when the deficit exceeds tol."""
        row = [j for j, p in self.trans[a - 1] if p > tol and j != 0]
        if self.target_mass[a - 1] > tol:
            row.append(0)
        return row

    @cached_property
    def P(self) -> np.ndarray:
        P = np.zeros((self.m, self.n))
        for a, row in enumerate(self.trans):
            for j, p in row:
                if 1 <= j <= self.n:
                    P[a, j - 1] += p
        P.setflags(write=False)
        return P

    @cached_property
    def J(self) -> np.ndarray:
        J = np.zeros((self.m, self.n))
        for a, s in enumerate(self.owner):
            if 1 <= s <= self.n:
                J[a, s - 1] = 1.0
        J.setflags(write=False)
        return J

    @cached_property
    def D(self) -> np.ndarray:
        """``J - P``; ``D.T`` is the flux constraint matrix."""
        D = self.J - self.P
        D.setflags(write=False)
        return D

    @cached_property
    def c(self) -> np.ndarray:
        c = np.asarray(self.cost, dtype=float)
        c.setflags(write=False)
        return c

    @cached_property
    def owner_index(self) -> np.ndarray:
        """0-based owner state position of every action."""
        idx = np.asarray(self.owner, dtype=np.intp) - 1
        idx.setflags(write=False)
        return idx

    @cached_property
    def target_mass(self) -> np.ndarray:
        tm = 1.0 - self.P.sum(axis=1)
        tm.setflags(write=False)
        return tm

    def restrict(self, actions: Iterable[int]) -> tuple["SspInstance", list[int]]:
        """Sub-instance keeping only ``actions``; returns it with the old ids of the new actions."""
        keep = sorted(set(actions))
        sub = SspInstance(
            n=self.n,
            owner=tuple(self.owner[a - 1] for a in keep),
            trans=tuple(self.trans[a - 1] for a in keep),
            cost=tuple(self.cost[a - 1] for a in keep),
            labels=tuple(self.labels[a - 1] for a in keep) if self.labels else None,
        )
        return sub, keep


def validate(instance: SspInstance, tol: float = TOL) -> list[str]:
    """List every structural violation of ``instance``; an empty list means valid."""
    out = []
    n = instance.n
    if n < 0:
        out.append(f"n must be nonnegative, got {n}")
    if not (len(instance.owner) == len(instance.trans) == len(instance.cost)):
        out.append("owner, trans and cost lengths differ")
        return out
    if instance.labels is not None and len(instance.labels) != instance.m:
        out.append("labels length differs from the number of actions")
    owned = set()
    for a in range(1, instance.m + 1):
        s = instance.owner[a - 1]
        if not 1 <= s <= n:
            out.append(f"action {a}: owner {s} outside 1..{n}")
        else:
            owned.add(s)
        c = instance.cost[a - 1]
        if not math.isfinite(c):
            out.append(f"action {a}: cost {c} is not finite")
        seen = set()
        total = 0.0
        explicit_target = None
        for j, p in instance.trans[a - 1]:
            if j in seen:
                out.append(f"action {a}: duplicate transition entry for state {j}")
            seen.add(j)
            if not 0 <= j <= n:
                out.append(f"action {a}: transition to unknown state {j}")
            if not math.isfinite(p) or p < tol or p > 1 + tol:
                out.append(f"action {a}: probability {p} to state {j} outside [{tol}, 1]")
            if j == 0:
                explicit_target = p
            else:
                total += p
        if total > 1 + tol:
            out.append(f"action {a}: row sums to {total} > 1 (not substochastic)")
        elif explicit_target is not None and abs(explicit_target - (1 - total)) > tol:
            out.append(
                f"action {a}: explicit target mass {explicit_target} differs from deficit {1 - total}"
            )
    for s in range(1, n + 1):
        if s not in owned:
            out.append(f"state {s} owns no action")
    return out


def _check_valid(instance: SspInstance) -> None:
    problems = validate(instance)
    if problems:
        raise InvalidInstance("; ".join(problems))


def to_s_ssp(instance: SspInstance) -> tuple[SspInstance, int]:
    """Add a source state with one zero-cost action spreading mass 1/n over 1..n."""
    n = instance.n
    new_state = n + 1
    row = tuple((j, 1.0 / n) for j in range(1, n + 1))
    labels = None
    if instance.labels is not None:
        labels = instance.labels + ("source",)
    inst = SspInstance(
        n=n + 1,
        owner=instance.owner + (new_state,),
        trans=instance.trans + (row,),
        cost=instance.cost + (0.0,),
        labels=labels,
    )
    return inst, new_state


def to_aux_ssp(instance: SspInstance, M) -> tuple[SspInstance, dict[int, int]]:
    """Add, for each state i, an action of cost ``M[i-1]`` going to the target surely.

    Returns the augmented instance and the map state -> escape action id.
    """
    M = np.asarray(M, dtype=float)
    n, m = instance.n, instance.m
    if M.shape != (n,) or not np.all(np.isfinite(M)):
        raise ValueError(f"M must be a finite vector of length {n}")
    labels = None
    if instance.labels is not None:
        labels = instance.labels + tuple(f"esc{i}" for i in range(1, n + 1))
    inst = SspInstance(
        n=n,
        owner=instance.owner + tuple(range(1, n + 1)),
        trans=instance.trans + ((),) * n,
        cost=instance.cost + tuple(float(v) for v in M),
        labels=labels,
    )
    return inst, {i: m + i for i in range(1, n + 1)}


class Policy:
    """A stationary policy, deterministic or randomized.

    ``Policy({1: 3, 2: 5})`` is deterministic.  ``Policy({1: {3: .5, 4: .5}})``
    (or lists of ``(action, weight)`` pairs) is randomized.  States absent from
    the map have no prescribed action; such a policy is only usable from
    sources that never reach them.
    """

    def __init__(self, choice: Mapping, kind: str | None = None):
        weights: dict[int, dict[int, float]] = {}
        guessed = "deterministic"
        for s, v in choice.items():
            if isinstance(v, (Mapping, list, tuple)):
                guessed = "randomized"
                items = v.items() if isinstance(v, Mapping) else v
                weights[int(s)] = {int(a): float(w) for a, w in items if float(w) != 0.0}
            else:
                weights[int(s)] = {int(v): 1.0}
        self.kind = kind or guessed
        if self.kind not in ("deterministic", "randomized"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "deterministic" and any(len(w) != 1 for w in weights.values()):
            raise ValueError("a deterministic policy picks exactly one action per state")
        self._weights = MappingProxyType(
            {s: MappingProxyType(dict(sorted(w.items()))) for s, w in sorted(weights.items())}
        )

    @classmethod
    def from_actions(cls, instance: SspInstance, actions: Iterable[int]) -> "Policy":
        return cls({instance.owner[a - 1]: a for a in actions})

    @property
    def is_deterministic(self) -> bool:
        return self.kind == "deterministic"

    @property
    def weights(self) -> Mapping[int, Mapping[int, float]]:
        return self._weights

    @property
    def states(self) -> list[int]:
        return list(self._weights)

    def action(self, s: int) -> int:
        w = self._weights[s]
        if len(w) != 1:
            raise ValueError(f"state {s} is randomized")
        return next(iter(w))

    def actions(self) -> set[int]:
        """Every action played with positive weight."""
        return {a for w in self._weights.values() for a in w}

    def as_dict(self) -> dict:
        if self.is_deterministic:
            return {s: self.action(s) for s in self._weights}
        return {s: dict(w) for s, w in self._weights.items()}

    def matrix(self, instance: SspInstance) -> np.ndarray:
        """The ``n x m`` stochastic matrix Pi with Pi[s-1, a-1] = weight of a in s."""
        W = np.zeros((instance.n, instance.m))
        for s, w in self._weights.items():
            for a, p in w.items():
                W[s - 1, a - 1] = p
        return W

    def transition_matrix(self, instance: SspInstance) -> np.ndarray:
        """State-to-state substochastic matrix P_Pi (rows of unlisted states are zero)."""
        return self.matrix(instance) @ instance.P

    def cost_vector(self, instance: SspInstance) -> np.ndarray:
        return self.matrix(instance) @ instance.c

    def __eq__(self, other):
        if not isinstance(other, Policy):
            return NotImplemented
        return self.kind == other.kind and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.kind, tuple((s, tuple(w.items())) for s, w in self._weights.items())))

    def __repr__(self):
        return f"Policy({self.as_dict()!r}, kind={self.kind!r})"


def validate_policy(instance: SspInstance, policy: Policy, tol: float = TOL) -> list[str]:
    out = []
    for s, w in policy.weights.items():
        if not 1 <= s <= instance.n:
            out.append(f"state {s} outside 1..{instance.n}")
            continue
        for a, p in w.items():
            if not 1 <= a <= instance.m:
                out.append(f"state {s}: unknown action {a}")
            elif instance.owner[a - 1] != s:
                out.append(f"state {s}: action {a} belongs to state {instance.owner[a - 1]}")
            if p < 0:
                out.append(f"state {s}: negative weight {p} on action {a}")
        if abs(sum(w.values()) - 1.0) > tol:
            out.append(f"state {s}: weights sum to {sum(w.values())}")
    return out


@dataclass(frozen=True)
class DecompositionPart:
    weight: float
    policy: Policy
    flux: np.ndarray


@dataclass(frozen=True)
class Decomposition:
    """``x = sum(weight_j * flux_j) + residual`` with the residual a transition cycle."""

    parts: list[DecompositionPart]
    residual: np.ndarray
    rounds: int = 0
    support_size: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.parts])

    def reconstruct(self) -> np.ndarray:
        x = self.residual.copy()
        for p in self.parts:
            x = x + p.weight * p.flux
        return x
