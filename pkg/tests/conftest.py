"""Independent oracles shared by the test modules.

Nothing here calls into sspkit's solvers or graph code: properness is decided
by spectral radius, values by dense solves, shortest paths by networkx, LPs
by scipy's HiGHS.
"""

import itertools

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog

from sspkit import Policy, load_fixture


def dense(instance):
    """(J, P, c, owner) rebuilt straight from the raw action data."""
    n, m = instance.n, instance.m
    J = np.zeros((m, n))
    P = np.zeros((m, n))
    for a in range(m):
        J[a, instance.owner[a] - 1] = 1
        for j, p in instance.trans[a]:
            P[a, j - 1] = p
    return J, P, np.array(instance.cost), [instance.owner[a] - 1 for a in range(m)]


def spectral_proper(P_pi):
    return max(abs(np.linalg.eigvals(P_pi))) < 1 - 1e-10 if P_pi.size else True


def brute_force(instance):
    """Enumerate deterministic stationary policies; return (best objective, best values, best choices, count)."""
    J, P, c, owner = dense(instance)
    n = instance.n
    per_state = [[a for a in range(instance.m) if owner[a] == s] for s in range(n)]
    best = (np.inf, None, [])
    proper_count = 0
    for combo in itertools.product(*per_state):
        Ppi = P[list(combo)]
        if not spectral_proper(Ppi):
            continue
        proper_count += 1
        V = np.linalg.solve(np.eye(n) - Ppi, c[list(combo)])
        obj = V.sum()
        if obj < best[0] - 1e-9:
            best = (obj, V, [tuple(a + 1 for a in combo)])
        elif abs(obj - best[0]) <= 1e-9:
            best[2].append(tuple(a + 1 for a in combo))
    return best[0], best[1], best[2], proper_count


def bellman_ford_to_target(instance):
    """Shortest distance from every state to 0 on a deterministic instance."""
    G = nx.MultiDiGraph()
    G.add_nodes_from(range(instance.n + 1))
    for a in range(instance.m):
        s = instance.owner[a]
        to = [j for j, p in instance.trans[a] if p > 0.5]
        head = to[0] if to else 0
        G.add_edge(head, s, weight=instance.cost[a])  # reversed
    dist = nx.single_source_bellman_ford_path_length(G, 0, weight="weight")
    return np.array([dist[s] for s in range(1, instance.n + 1)])


def highs_lp(A, b, c):
    res = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * len(c), method="highs")
    return res


@pytest.fixture
def chain():
    return load_fixture("chain")


@pytest.fixture
def coin():
    return load_fixture("coin")


@pytest.fixture
def fig1():
    return load_fixture("fig1")


@pytest.fixture
def fig2():
    return load_fixture("fig2")


@pytest.fixture
def negloop():
    return load_fixture("negloop")


def by_label(instance, mapping):
    """Policy from {state: label}."""
    return Policy({s: instance.action_id(lbl) for s, lbl in mapping.items()})
