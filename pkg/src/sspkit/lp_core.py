"""Dense revised simplex for ``min c'x, Ax = b, x >= 0`` and the SSP-specific LPs.

The flux LP has one row per state and one column per action:
``A = (J - P)^T``.  Its dual is ``max b'y, (J - P) y <= c``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import support_graph
from .errors import NumericalFailure
from .model import SspInstance

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
CYCLE_TOL = 1e-8
OPT_TOL = 1e-9
REFACTOR_EVERY = 50
STALL_LIMIT = 30


@dataclass(frozen=True)
class LinearProgram:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        c = np.asarray(self.c, dtype=float).ravel()
        if A.shape != (b.size, c.size):
            raise ValueError(f"inconsistent shapes A{A.shape}, b({b.size}), c({c.size})")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    basis: tuple[int, ...] = ()
    objective: float = float("nan")
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Basis bookkeeping for one simplex run: explicit inverse with eta updates."""

    def __init__(self, A, b, basis, barred=None):
        self.A = A
        self.b = b
        self.p, self.q = A.shape
        self.basis = list(basis)
        self.barred = np.zeros(self.q, bool) if barred is None else barred
        self.since_refactor = 0
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        try:
            lu = scipy.linalg.lu_factor(B, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NumericalFailure(f"basis factorization failed: {exc}") from exc
        diag = np.abs(np.diag(lu[0]))
        if diag.size and diag.min() <= 1e-12 * max(1.0, diag.max()):
            raise NumericalFailure("singular basis matrix")
        self.Binv = scipy.linalg.lu_solve(lu, np.eye(self.p), check_finite=False)
        self.xB = self.Binv @ self.b
        resid = np.abs(B @ self.xB - self.b).max(initial=0.0)
        if resid > 1e-6 * (1 + np.abs(self.b).max(initial=0.0)):
            raise NumericalFailure(f"basis residual {resid:.3g} after refactorization")
        self.since_refactor = 0

    def pivot(self, r, j, u):
        piv = u[r]
        row = self.Binv[r] / piv
        self.Binv -= np.outer(u, row)
        self.Binv[r] = row
        theta = self.xB[r] / piv
        self.xB -= theta * u
        self.xB[r] = theta
        self.basis[r] = j
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def duals(self, c):
        return self.Binv.T @ c[self.basis]

    def run(self, c, rule="dantzig", max_iter=10_000, pivot_tol=PIVOT_TOL, opt_tol=OPT_TOL):
        """Iterate to optimality; returns ``(status, iterations)``."""
        bland = rule == "bland"
        stalled = 0
        last_obj = float("inf")
        scale = 1.0 + np.abs(c).max(initial=0.0)
        for it in range(max_iter):
            y = self.duals(c)
            d = c - self.A.T @ y
            d[self.basis] = 0.0
            d[self.barred] = 0.0
            cand = np.flatnonzero(d < -opt_tol * scale)
            if cand.size == 0:
                return "optimal", it
            j = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            u = self.Binv @ self.A[:, j]
            rows = np.flatnonzero(u > pivot_tol)
            if rows.size == 0:
                return "unbounded", it
            ratios = np.maximum(self.xB[rows], 0.0) / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1 + best)]
            if bland or ties.size == 1:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(u[ties])])
            self.pivot(r, j, u)
            obj = float(c[self.basis] @ self.xB)
            if obj < last_obj - 1e-12 * (1 + abs(obj)):
                stalled = 0
                last_obj = obj
            else:
                stalled += 1
                if stalled > STALL_LIMIT and not bland:
                    log.debug("degenerate stall, switching to Bland's rule")
                    bland = True
        raise NumericalFailure(f"simplex iteration limit {max_iter} reached")


def solve(
    lp: LinearProgram,
    starting_basis=None,
    rule: str = "dantzig",
    max_iter: int | None = None,
    pivot_tol: float = PIVOT_TOL,
    feas_tol: float = FEAS_TOL,
) -> LpSolution:
    """Two-phase revised simplex.

    With ``starting_basis`` (column indices forming a primal feasible basis)
    phase one is skipped.  ``rule`` is ``"dantzig"`` (default; falls back to
    Bland on long degenerate stalls) or ``"bland"``.
    """
    A, b, c = lp.A, lp.b, lp.c
    p, q = A.shape
    if max_iter is None:
        max_iter = 50 * (p + q) + 100
    if p == 0:
        if np.any(c < -OPT_TOL):
            return LpSolution("unbounded")
        return LpSolution("optimal", np.zeros(q), np.zeros(0), (), 0.0)

    if starting_basis is not None:
        basis = [int(j) for j in starting_basis]
        if len(basis) != p or len(set(basis)) != p:
            raise ValueError(f"starting basis must list {p} distinct columns")
        tab = _Tableau(A, b, basis)
        if tab.xB.min() < -feas_tol * (1 + np.abs(b).max()):
            raise ValueError("starting basis is not primal feasible")
        status, its = tab.run(c, rule, max_iter, pivot_tol)
        return _finish(tab, c, status, its, sign=np.ones(p), q=q)

    # Phase one on [A | I] with rows flipped so that b >= 0.
    sign = np.where(b < 0, -1.0, 1.0)
    A1 = np.hstack([A * sign[:, None], np.eye(p)])
    b1 = b * sign
    c1 = np.concatenate([np.zeros(q), np.ones(p)])
    tab = _Tableau(A1, b1, range(q, q + p))
    status, its1 = tab.run(c1, rule, max_iter, pivot_tol)
    infeas = float(c1[tab.basis] @ tab.xB)
    if infeas > feas_tol * (1 + np.abs(b).max()):
        return LpSolution("infeasible", iterations=its1, meta={"phase_one_objective": infeas})

    # Drive artificials out of the basis where possible; rows where no real
    # column can replace them are redundant and the artificial stays at zero.
    for r in range(p):
        if tab.basis[r] < q:
            continue
        row = tab.Binv[r] @ A1[:, :q]
        row[[j for j in tab.basis if j < q]] = 0.0
        k = int(np.argmax(np.abs(row)))
        if abs(row[k]) > 1e-7:
            tab.pivot(r, k, tab.Binv @ A1[:, k])
    tab.barred = np.arange(q + p) >= q
    c2 = np.concatenate([c, np.zeros(p)])
    status, its2 = tab.run(c2, rule, max_iter, pivot_tol)
    return _finish(tab, c2, status, its1 + its2, sign=sign, q=q)


def _finish(tab, c, status, its, sign, q):
    if status == "unbounded":
        return LpSolution("unbounded", iterations=its)
    tab.refactor()
    x = np.zeros(tab.q)
    x[tab.basis] = tab.xB
    x = np.where(np.abs(x) < 1e-13, 0.0, x)
    y = tab.duals(c) * sign
    basis = tuple(sorted(j for j in tab.basis if j < q))
    xq = x[:q]
    return LpSolution("optimal", xq, y, basis, float(c[:q] @ xq), its)


# --- SSP-specific programs -------------------------------------------------


def _rhs_vector(instance: SspInstance, rhs) -> np.ndarray:
    if isinstance(rhs, str):
        if rhs != "ones":
            raise ValueError(f"unknown rhs {rhs!r}")
        return np.ones(instance.n)
    if np.isscalar(rhs):
        e = np.zeros(instance.n)
        e[int(rhs) - 1] = 1.0
        return e
    v = np.asarray(rhs, dtype=float)
    if v.shape != (instance.n,):
        raise ValueError(f"rhs must have length {instance.n}")
    return v


def assemble_flux_lp(instance: SspInstance, rhs="ones") -> LinearProgram:
    """``min c'x`` s.t. ``(J - P)^T x = rhs``, ``x >= 0``.

    ``rhs`` is ``"ones"`` (the SSP, unscaled), a state id (e_s) or a vector.
    """
    return LinearProgram(instance.D.T.copy(), _rhs_vector(instance, rhs), instance.c.copy())


def detect_negative_transition_cycle(instance: SspInstance, cycle_tol: float = CYCLE_TOL):
    """A transition cycle of negative cost, or ``None``.

    Cycles form the cone ``{x >= 0 : (J - P)^T x = 0}``; normalizing with
    ``1'x = 1`` makes the LP bounded.
    """
    if instance.m == 0:
        return None
    A = np.vstack([instance.D.T, np.ones((1, instance.m))])
    b = np.zeros(instance.n + 1)
    b[-1] = 1.0
    sol = solve(LinearProgram(A, b, instance.c.copy()))
    if sol.status != "optimal" or sol.objective >= -cycle_tol:
        return None
    return sol.x


@dataclass
class AssumptionReport:
    proper_exists: bool
    dead_states: set
    negative_cycle: np.ndarray | None
    negative_cycle_cost: float | None = None

    @property
    def ok(self) -> bool:
        return self.proper_exists and self.negative_cycle is None

    def as_dict(self) -> dict:
        cyc = None
        if self.negative_cycle is not None:
            cyc = {str(a): float(v) for a, v in enumerate(self.negative_cycle, start=1) if v > 0}
        return {
            "proper_exists": self.proper_exists,
            "dead_states": sorted(self.dead_states),
            "negative_cycle": cyc,
            "negative_cycle_cost": self.negative_cycle_cost,
            "ok": self.ok,
        }


def validate_assumptions(instance: SspInstance) -> AssumptionReport:
    """Reachability of the target from every state, and no negative transition cycle."""
    proper, dead = support_graph.check_proper_exists(instance)
    cycle = detect_negative_transition_cycle(instance)
    cost = None if cycle is None else float(instance.c @ cycle)
    return AssumptionReport(proper, dead, cycle, cost)
