"""Generalized stochastic shortest path toolkit.

Check the standing assumptions on an instance (every state can reach the
target; no negative-cost transition cycle), then solve it by value iteration,
Howard policy iteration, linear programming or the primal-dual method.
"""

from .errors import *  # noqa: F401,F403
from .evaluate import (
    decompose_flux,
    evaluate_policy_flux,
    evaluate_policy_values,
    is_proper,
    reduced_costs,
    truncated_series_flux,
)
from .fixtures import load_fixture
from .generate import random_instance
from .io import read_instance, write_instance
from .lp_core import (
    LinearProgram,
    LpSolution,
    assemble_flux_lp,
    detect_negative_transition_cycle,
    validate_assumptions,
)
from .model import Decomposition, Policy, SspInstance, to_aux_ssp, to_s_ssp, validate
from .solvers import (
    SolveResult,
    extract_policy,
    maxprob,
    policy_iteration,
    primal_dual,
    solve,
    solve_lp,
    value_iteration,
)
from .support_graph import build as build_support_graph
from .support_graph import check_proper_exists, construct_proper_policy, reach_to_target, uniform_policy

__version__ = "0.1.0"
