import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import bellman_ford_to_target, brute_force, highs_lp
from sspkit import SspInstance, random_instance
from sspkit.errors import InvalidInstance
from sspkit.lp_core import (
    LinearProgram,
    assemble_flux_lp,
    detect_negative_transition_cycle,
    solve,
    validate_assumptions,
)


def check_optimality(lp, sol, tol=1e-7):
    A, b, c = lp.A, lp.b, lp.c
    assert np.abs(A @ sol.x - b).max() <= 1e-8
    assert sol.x.min() >= -1e-9
    slack = c - A.T @ sol.y
    assert slack.min() >= -tol
    assert abs(c @ sol.x - b @ sol.y) <= tol * (1 + abs(c @ sol.x))
    assert (sol.x * slack).max(initial=0.0) <= tol


class TestAssemble:
    def test_chain_e2(self, chain):
        lp = assemble_flux_lp(chain, 2)
        assert_allclose(lp.A, [[1, -1], [0, 1]])
        assert_allclose(lp.b, [0, 1])
        assert_allclose(lp.c, [1, 2])

    def test_coin_e1(self, coin):
        lp = assemble_flux_lp(coin, 1)
        assert_allclose(lp.A, [[0.5]])
        assert_allclose(lp.b, [1])

    def test_fig1_ones(self, fig1):
        lp = assemble_flux_lp(fig1)
        assert lp.A.shape == (4, 7)
        assert_allclose(lp.A[:, fig1.action_id("c") - 1], [1, -0.3, 0, -0.7])
        assert_allclose(lp.b, np.ones(4))

    def test_vector_rhs(self, fig1):
        assert_allclose(assemble_flux_lp(fig1, [0, 1, 0, 2]).b, [0, 1, 0, 2])
        with pytest.raises(ValueError):
            assemble_flux_lp(fig1, [1, 2])
        with pytest.raises(ValueError):
            assemble_flux_lp(fig1, "twos")


class TestLinearProgram:
    def test_shape_mismatch(self):
        with pytest.raises((ValueError, InvalidInstance)):
            LinearProgram(np.ones((2, 3)), np.ones(3), np.ones(3))

    def test_non_finite(self):
        with pytest.raises((ValueError, InvalidInstance)):
            LinearProgram(np.array([[np.nan]]), np.ones(1), np.ones(1))


class TestSolve:
    def test_chain_e2(self, chain):
        sol = solve(assemble_flux_lp(chain, 2))
        assert sol.optimal
        assert_allclose(sol.x, [1, 1])
        assert sol.objective == pytest.approx(3)

    def test_coin_e1(self, coin):
        sol = solve(assemble_flux_lp(coin, 1))
        assert_allclose(sol.x, [2])
        assert sol.objective == pytest.approx(2)
        assert_allclose(sol.y, [2])

    def test_chain_ones(self, chain):
        sol = solve(assemble_flux_lp(chain))
        assert sol.objective == pytest.approx(4)
        assert_allclose(sol.y, [1, 3])

    def test_fig1_matches_brute_force(self, fig1):
        obj, V, best, count = brute_force(fig1)
        assert count == 6 and obj == pytest.approx(29)
        lp = assemble_flux_lp(fig1)
        sol = solve(lp)
        assert sol.objective == pytest.approx(obj, abs=1e-9)
        assert_allclose(sol.y, V, atol=1e-9)
        # basis of the optimal policy {1:d, 2:b, 3:f, 4:g}
        assert sol.basis == (1, 3, 5, 6)
        check_optimality(lp, sol)

    def test_infeasible(self):
        lp = LinearProgram(np.array([[1.0, 1.0]]), np.array([-1.0]), np.array([1.0, 1.0]))
        assert solve(lp).status == "infeasible"

    def test_unbounded(self):
        lp = LinearProgram(np.array([[1.0, -1.0]]), np.array([1.0]), np.array([0.0, -1.0]))
        assert solve(lp).status == "unbounded"

    def test_redundant_rows(self):
        A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
        lp = LinearProgram(A, np.array([1.0, 2.0, 1.0]), np.array([1.0, 2.0, 0.5]))
        sol = solve(lp)
        ref = highs_lp(A, lp.b, lp.c)
        assert sol.optimal and sol.objective == pytest.approx(ref.fun, abs=1e-9)
        assert np.abs(A @ sol.x - lp.b).max() <= 1e-9

    def test_warm_start_skips_phase_one(self, fig1):
        lp = assemble_flux_lp(fig1)
        cold = solve(lp)
        # basis of the layered policy {1:c, 2:b, 3:e, 4:g}
        warm = solve(lp, starting_basis=[2, 1, 4, 6])
        assert warm.objective == pytest.approx(cold.objective, abs=1e-9)
        assert warm.iterations < cold.iterations

    def test_bad_starting_basis(self, fig1):
        lp = assemble_flux_lp(fig1)
        with pytest.raises(ValueError):
            solve(lp, starting_basis=[0, 1])

    @pytest.mark.parametrize("rule", ["dantzig", "bland"])
    def test_against_highs_on_random_lps(self, rule):
        rng = np.random.default_rng(3)
        for _ in range(60):
            p, q = rng.integers(2, 8), rng.integers(3, 14)
            A = rng.normal(size=(p, q))
            x0 = rng.uniform(0, 1, size=q) * (rng.random(q) < 0.6)
            b = A @ x0
            c = rng.uniform(-1, 3, size=q)
            ref = highs_lp(A, b, c)
            sol = solve(LinearProgram(A, b, c), rule=rule)
            if ref.status == 3:
                assert sol.status == "unbounded"
                continue
            assert ref.status == 0
            assert sol.optimal
            assert sol.objective == pytest.approx(ref.fun, abs=1e-7 * (1 + abs(ref.fun)))
            check_optimality(LinearProgram(A, b, c), sol)

    def test_ssp_lps_against_highs(self):
        for seed in range(40):
            inst = random_instance(12, 3, seed=seed)
            lp = assemble_flux_lp(inst)
            sol = solve(lp)
            ref = highs_lp(lp.A, lp.b, lp.c)
            assert sol.objective == pytest.approx(ref.fun, abs=1e-7 * (1 + abs(ref.fun)))
            check_optimality(lp, sol)

    def test_deterministic_matches_bellman_ford(self):
        for seed in range(40):
            inst = random_instance(15, 3, nonneg=True, deterministic=True, seed=seed)
            dist = bellman_ford_to_target(inst)
            for s in (1, inst.n):
                sol = solve(assemble_flux_lp(inst, s))
                assert abs(sol.objective - dist[s - 1]) <= 1e-9
            sol = solve(assemble_flux_lp(inst))
            assert abs(sol.objective - dist.sum()) <= 1e-9 * (1 + abs(dist.sum()))


class TestNegativeCycle:
    def test_chain_none(self, chain):
        assert detect_negative_transition_cycle(chain) is None

    def test_fig1_none(self, fig1):
        assert detect_negative_transition_cycle(fig1) is None

    def test_negloop(self, negloop):
        x = detect_negative_transition_cycle(negloop)
        assert_allclose(x, [0.5, 0.5, 0, 0], atol=1e-12)
        assert negloop.c @ x == pytest.approx(-0.5)

    def test_zero_cost_cycle_is_not_negative(self):
        inst = SspInstance.from_actions(2, [(1, 0.0, {2: 1.0}), (2, 0.0, {1: 1.0}), (1, 1.0, {}), (2, 1.0, {})])
        assert detect_negative_transition_cycle(inst) is None

    def test_stochastic_cycle(self):
        # w stays at 1 w.p. 1/2 and moves to 2 otherwise; r returns 2 -> 1
        inst = SspInstance.from_actions(
            2, [(1, -1.0, {1: 0.5, 2: 0.5}), (2, 0.2, {1: 1.0}), (1, 5.0, {}), (2, 5.0, {})]
        )
        x = detect_negative_transition_cycle(inst)
        assert x is not None
        assert np.abs(inst.D.T @ x).max() <= 1e-9
        assert_allclose(x, [2 / 3, 1 / 3, 0, 0], atol=1e-12)

    def test_scale_soundness(self):
        # any positive multiple of a negative ray has the same normalized optimum
        rng = np.random.default_rng(11)
        base = SspInstance.from_actions(
            3, [(1, -1.0, {2: 1.0}), (2, 0.5, {3: 0.7, 1: 0.3}), (3, 0.1, {1: 1.0}),
                (1, 1.0, {}), (2, 1.0, {}), (3, 1.0, {})]
        )
        x = detect_negative_transition_cycle(base)
        assert x is not None and abs(x.sum() - 1) <= 1e-12
        for t in rng.uniform(0.01, 100, size=10):
            ray = t * x
            assert np.abs(base.D.T @ ray).max() <= 1e-9 * t
            assert base.c @ ray < 0
            assert_allclose(ray / ray.sum(), x, atol=1e-12)
        # a positive-cost ray scaled any amount is never reported
        flipped = SspInstance.from_actions(
            3, [(1, 1.0, {2: 1.0}), (2, 0.5, {3: 0.7, 1: 0.3}), (3, 0.1, {1: 1.0}),
                (1, 1.0, {}), (2, 1.0, {}), (3, 1.0, {})]
        )
        assert detect_negative_transition_cycle(flipped) is None


class TestValidateAssumptions:
    def test_fig1(self, fig1):
        r = validate_assumptions(fig1)
        assert r.ok and r.proper_exists and r.dead_states == set() and r.negative_cycle is None

    def test_negloop(self, negloop):
        r = validate_assumptions(negloop)
        assert r.proper_exists and not r.ok
        assert r.negative_cycle_cost == pytest.approx(-0.5)
        assert r.as_dict()["negative_cycle"] == {"1": 0.5, "2": 0.5}

    def test_isolated(self):
        inst = SspInstance.from_actions(2, [(1, 1.0, {}), (2, 1.0, {2: 1.0})])
        r = validate_assumptions(inst)
        assert not r.proper_exists and r.dead_states == {2}
        assert r.as_dict()["dead_states"] == [2]

    def test_generated_always_valid(self):
        for seed in range(30):
            assert validate_assumptions(random_instance(8, 3, seed=seed)).ok
