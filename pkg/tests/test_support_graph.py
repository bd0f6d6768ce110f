import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import spectral_proper
from strategies import instances
from sspkit import Policy, SspInstance, random_instance
from sspkit.errors import NoProperPolicy
from sspkit.evaluate import is_proper
from sspkit.support_graph import (
    bfs_layers,
    build,
    check_proper_exists,
    construct_proper_policy,
    reach_to_target,
    uniform_policy,
)


def labelled_edges(inst, g):
    out = set()
    for kind, u, _, v in g.edges():
        if kind == "s":
            out.add((str(u), inst.label(v)))
        else:
            out.add((inst.label(u), str(v)))
    return out


class TestBuild:
    def test_fig1_full(self, fig1):
        g = build(fig1)
        assert len(g.states) == 5 and len(g.actions) == 7
        assert labelled_edges(fig1, g) == {
            ("4", "a"), ("a", "2"), ("2", "b"), ("b", "1"), ("1", "c"), ("c", "4"), ("c", "2"),
            ("1", "d"), ("d", "3"), ("d", "4"), ("3", "e"), ("e", "1"), ("e", "0"),
            ("3", "f"), ("f", "0"), ("f", "4"), ("4", "g"), ("g", "0"),
        }

    def test_fig1_only_c(self, fig1):
        g = build(fig1, [fig1.action_id("c")])
        assert len(g.states) == 5 and len(g.actions) == 1
        assert labelled_edges(fig1, g) == {("1", "c"), ("c", "4"), ("c", "2")}

    def test_chain_path(self, chain):
        assert labelled_edges(chain, build(chain)) == {("2", "v"), ("v", "1"), ("1", "u"), ("u", "0")}


class TestReach:
    def test_fig1(self, fig1):
        assert reach_to_target(build(fig1)) == {0, 1, 2, 3, 4}

    def test_fig1_restricted(self, fig1):
        g = build(fig1, [fig1.action_id("a"), fig1.action_id("c")])
        assert reach_to_target(g) == {0}

    def test_chain(self, chain):
        assert reach_to_target(build(chain)) == {0, 1, 2}

    @settings(max_examples=150, deadline=None)
    @given(instances(), st.data())
    def test_monotone_in_edges(self, inst, data):
        acts = list(range(1, inst.m + 1))
        sub = data.draw(st.sets(st.sampled_from(acts)))
        extra = data.draw(st.sets(st.sampled_from(acts)))
        small = reach_to_target(build(inst, sub))
        big = reach_to_target(build(inst, sub | extra))
        assert small <= big


class TestProperExists:
    def test_fig1(self, fig1):
        assert check_proper_exists(fig1) == (True, set())

    def test_fig2(self, fig2):
        assert check_proper_exists(fig2) == (True, set())

    def test_isolated_self_loop(self):
        inst = SspInstance.from_actions(2, [(1, 1.0, {}), (2, 1.0, {2: 1.0})])
        assert check_proper_exists(inst) == (False, {2})

    def test_cascade(self):
        # state 1 reaches 0 in the graph, but its only action may strand it in state 2
        inst = SspInstance.from_actions(3, [(1, 1.0, {2: 0.5}), (2, 0.0, {2: 1.0}), (3, 1.0, {})])
        assert check_proper_exists(inst) == (False, {1, 2})


class TestConstruct:
    def test_chain(self, chain):
        assert construct_proper_policy(chain) == Policy({1: 1, 2: 2})

    def test_fig1_tie_break(self, fig1):
        p = construct_proper_policy(fig1)
        labels = {s: fig1.label(a) for s, a in p.as_dict().items()}
        # layers: 3,4 -> 1 hop; 1 -> 2 hops via c or d (c has lower id); 2 -> 3 hops via b
        assert labels == {1: "c", 2: "b", 3: "e", 4: "g"}

    def test_fig1_optimal_tight_set(self, fig1):
        tight = [fig1.action_id(x) for x in "bdfg"]
        assert construct_proper_policy(fig1, tight) == Policy({1: 4, 2: 2, 3: 6, 4: 7})

    def test_raises(self):
        inst = SspInstance.from_actions(2, [(1, 1.0, {}), (2, 1.0, {2: 1.0})])
        with pytest.raises(NoProperPolicy) as err:
            construct_proper_policy(inst)
        assert err.value.dead_states == {2}

    @settings(max_examples=1000, deadline=None)
    @given(instances())
    def test_always_proper_when_possible(self, inst):
        exists, _ = check_proper_exists(inst)
        if not exists:
            return
        p = construct_proper_policy(inst)
        assert is_proper(inst, p)
        assert spectral_proper(p.transition_matrix(inst))

    @settings(max_examples=200, deadline=None)
    @given(instances())
    def test_hop_distance_matches_layer(self, inst):
        if not check_proper_exists(inst)[0]:
            return
        p = construct_proper_policy(inst)
        layer, _ = bfs_layers(build(inst))
        hops, _ = bfs_layers(build(inst, p.actions()))
        for s in range(1, inst.n + 1):
            assert s in hops and hops[s] <= layer[s]


class TestUniform:
    def test_fig1(self, fig1):
        p = uniform_policy(fig1)
        lab = {s: {fig1.label(a): w for a, w in ws.items()} for s, ws in p.weights.items()}
        assert lab == {1: {"c": .5, "d": .5}, 2: {"b": 1.0}, 3: {"e": .5, "f": .5}, 4: {"a": .5, "g": .5}}

    def test_chain_weights_one(self, chain):
        p = uniform_policy(chain)
        assert p.kind == "randomized"
        assert {s: dict(w) for s, w in p.weights.items()} == {1: {1: 1.0}, 2: {2: 1.0}}

    def test_restricted(self, fig1):
        tight = [fig1.action_id(x) for x in "bcdfg"]
        p = uniform_policy(fig1, tight)
        assert dict(p.weights[4]) == {fig1.action_id("g"): 1.0}
        assert dict(p.weights[1]) == {3: 0.5, 4: 0.5}

    @settings(max_examples=200, deadline=None)
    @given(instances())
    def test_uniform_proper(self, inst):
        if not check_proper_exists(inst)[0]:
            with pytest.raises(NoProperPolicy):
                uniform_policy(inst)
            return
        p = uniform_policy(inst)
        assert is_proper(inst, p)
        assert spectral_proper(p.transition_matrix(inst))


def test_generated_instances_reach_target():
    for seed in range(20):
        inst = random_instance(10, 3, seed=seed, ensure_assumption1=False)
        assert check_proper_exists(inst)[0]
