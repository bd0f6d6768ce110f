"""Bipartite support graph, reachability, and proper-policy construction."""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .errors import NoProperPolicy
from .model import TOL, Policy, SspInstance


class SupportGraph:
    """States ``0..n`` and a subset of actions.

    Edges are ``s -> a`` when ``a`` belongs to ``s`` and ``a -> j`` when
    ``p(j|a) > tol``.  The target self-loop is implicit.  Adjacency is kept in
    both directions.
    """

    def __init__(self, instance: SspInstance, actions: Iterable[int], tol: float = TOL):
        self.instance = instance
        self.n = instance.n
        self.actions = tuple(sorted(set(actions)))
        self.out_actions: dict[int, list[int]] = {s: [] for s in range(self.n + 1)}
        self.succ: dict[int, list[int]] = {}
        self.into: dict[int, list[int]] = {s: [] for s in range(self.n + 1)}
        for a in self.actions:
            self.out_actions[instance.owner[a - 1]].append(a)
            succ = instance.successors(a, tol)
            self.succ[a] = succ
            for j in succ:
                self.into[j].append(a)

    @property
    def states(self) -> range:
        return range(self.n + 1)

    def edges(self) -> list[tuple[str, int, str, int]]:
        """Edge list as ``("s", s, "a", a)`` and ``("a", a, "s", j)`` tuples."""
        out = []
        for a in self.actions:
            out.append(("s", self.instance.owner[a - 1], "a", a))
            out.extend(("a", a, "s", j) for j in self.succ[a])
        return out

    def owner(self, a: int) -> int:
        return self.instance.owner[a - 1]


def build(instance: SspInstance, action_subset: Iterable[int] | None = None, tol: float = TOL) -> SupportGraph:
    if action_subset is None:
        action_subset = range(1, instance.m + 1)
    return SupportGraph(instance, action_subset, tol)


def reach_to_target(graph: SupportGraph) -> set[int]:
    """States with a directed path to state 0 (backward BFS from 0)."""
    seen = {0}
    seen_actions = set()
    queue = deque([0])
    while queue:
        s = queue.popleft()
        for a in graph.into[s]:
            if a in seen_actions:
                continue
            seen_actions.add(a)
            u = graph.owner(a)
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def reach_from(graph: SupportGraph, sources: Iterable[int]) -> set[int]:
    """States reachable from ``sources`` (forward BFS)."""
    seen = set(sources)
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for a in graph.out_actions[s]:
            for j in graph.succ[a]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
    return seen


def live_actions(instance: SspInstance, action_subset: Iterable[int] | None = None, tol: float = TOL):
    """Prune dead states and the actions leading into them until stable.

    A state is dead when it cannot reach 0.  An action that can move to a dead
    state is useless to every proper policy, so it is removed too, which may
    kill further states.  Returns ``(alive_states, kept_actions)``.
    """
    acts = set(range(1, instance.m + 1) if action_subset is None else action_subset)
    while True:
        g = build(instance, acts, tol)
        alive = reach_to_target(g)
        doomed = {a for a in acts if any(j not in alive for j in g.succ[a])}
        if not doomed:
            return alive, acts
        acts -= doomed


def check_proper_exists(instance: SspInstance, tol: float = TOL) -> tuple[bool, set[int]]:
    """Whether a proper policy exists, and the states from which none can start."""
    alive, _ = live_actions(instance, tol=tol)
    dead = set(range(1, instance.n + 1)) - alive
    return not dead, dead


def bfs_layers(graph: SupportGraph) -> tuple[dict[int, int], dict[int, int]]:
    """Hop distance to 0 for states, and ``1 + min successor distance`` for actions."""
    dist = {0: 0}
    adist: dict[int, int] = {}
    queue = deque([0])
    while queue:
        s = queue.popleft()
        for a in graph.into[s]:
            if a in adist:
                continue
            adist[a] = dist[s] + 1
            u = graph.owner(a)
            if u not in dist:
                dist[u] = adist[a]
                queue.append(u)
    return dist, adist


def _layered_choice(graph: SupportGraph) -> dict[int, int]:
    dist, adist = bfs_layers(graph)
    choice = {}
    for s in range(1, graph.n + 1):
        if s not in dist:
            continue
        best = [a for a in graph.out_actions[s] if adist.get(a) == dist[s]]
        choice[s] = min(best)
    return choice


def construct_proper_policy(
    instance: SspInstance, action_subset: Iterable[int] | None = None, tol: float = TOL
) -> Policy:
    """Deterministic proper policy from a BFS anti-arborescence toward 0.

    Each state keeps an action of minimal hop distance to the target, the
    lowest id on ties.  Such an action always has a successor one layer
    closer, so following the policy reaches 0 with positive probability from
    everywhere.
    """
    g = build(instance, action_subset, tol)
    choice = _layered_choice(g)
    dead = set(range(1, instance.n + 1)) - set(choice)
    if dead:
        raise NoProperPolicy(f"states {sorted(dead)} cannot reach the target", dead)
    return Policy(choice)


def partial_proper_policy(
    instance: SspInstance, action_subset: Iterable[int] | None = None, tol: float = TOL
) -> dict[int, int]:
    """Layered choice for the states that do reach 0; others are left out."""
    return _layered_choice(build(instance, action_subset, tol))


def uniform_policy(instance: SspInstance, action_subset: Iterable[int] | None = None, tol: float = TOL) -> Policy:
    """Randomized policy spreading weight evenly over each state's available actions."""
    g = build(instance, action_subset, tol)
    alive = reach_to_target(g)
    dead = set(range(1, instance.n + 1)) - alive
    if dead:
        raise NoProperPolicy(f"states {sorted(dead)} cannot reach the target", dead)
    return Policy(
        {s: {a: 1.0 / len(g.out_actions[s]) for a in g.out_actions[s]} for s in range(1, instance.n + 1)},
        kind="randomized",
    )
