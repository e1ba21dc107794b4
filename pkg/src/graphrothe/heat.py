"""Rothe time stepping for the semilinear heat flow

    du/dt + |u|^(p-1) u = Laplacian u   on the domain interior,
    u = 0 outside the interior,         u(., 0) = h,

with p >= 1. Each step minimizes the strictly convex functional

    F(u) = (1/l) I(u^2) - (2/l) I(u_prev u) + 2/(p+1) I(|u|^(p+1)) + E(u),

where I integrates over the interior and E is the gradient energy over
Omega; the minimizer solves (u - u_prev)/l + |u|^(p-1) u = Laplacian u.
For p = 1 this is one SPD solve; for p > 1 a damped (semismooth) Newton
iteration with an Armijo line search on F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import calculus, kernels
from .calculus import VertexField, field_on_interior, require_admissible
from .errors import (
    DomainMismatch,
    EmptyInterior,
    NonConvergence,
    TimeOutOfRange,
)
from .graph import Domain, ExhaustionSequence
from .operators import DIRECT_SOLVE_MAX, CachedSPD, DirichletOperator

NEWTON_TOL_FACTOR = 1e-12
NEWTON_MAX_ITER = 100
POWER_DERIV_FLOOR = 1e-12


@dataclass(frozen=True)
class TimePartition:
    """Equidistant grid t_i = T * (i/n), i = 0..n."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not (self.horizon > 0.0) or not math.isfinite(self.horizon):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def step_size(self):
        return self.horizon / self.steps

    @property
    def times(self):
        return self.horizon * (np.arange(self.steps + 1) / self.steps)


@dataclass(frozen=True)
class HeatProblem:
    """Problem data: domain (a finite Domain, or an ExhaustionSequence for
    unbounded targets), exponent p >= 1, initial field h, horizon T."""

    domain: object
    p: float
    initial: VertexField
    horizon: float

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not (self.horizon > 0.0):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.initial.graph is not self.domain.graph:
            raise DomainMismatch("initial field lives on a different graph")
        if isinstance(self.domain, Domain):
            if not self.domain.interior:
                raise EmptyInterior("problem domain has empty interior")
            require_admissible(self.initial, self.domain, "initial field")


@dataclass(frozen=True)
class RotheTrajectory:
    """The Rothe sequence u_{n,0}, ..., u_{n,n} on one finite domain."""

    problem: HeatProblem
    partition: TimePartition
    fields: tuple

    @property
    def quotients(self):
        """Difference quotients (u_i - u_{i-1}) / l for i = 1..n."""
        ell = self.partition.step_size
        g = self.fields[0].graph
        return tuple(
            VertexField(g, (self.fields[i].values
                            - self.fields[i - 1].values) / ell)
            for i in range(1, len(self.fields)))


def _power(w, p):
    return np.abs(w) ** (p - 1.0) * w if p != 1.0 else w


def step_functional(u, u_prev, prob, ell):
    """Value of the per-step functional F at ``u`` (ordered reductions)."""
    dom = prob.domain
    if u.graph is not dom.graph or u_prev.graph is not dom.graph:
        raise DomainMismatch("fields live on a different graph")
    require_admissible(u, dom, "u")
    require_admissible(u_prev, dom, "u_prev")
    g = dom.graph
    ids = dom.interior_ids
    sq = calculus.integrate(g, VertexField(g, u.values * u.values), ids)
    cross = calculus.integrate(g, VertexField(g, u_prev.values * u.values), ids)
    powr = calculus.integrate(
        g, VertexField(g, np.abs(u.values) ** (prob.p + 1.0)), ids)
    grad = calculus._gamma_integral(g, u, u, dom.omega_ids)
    return (sq / ell - 2.0 * cross / ell
            + 2.0 / (prob.p + 1.0) * powr + grad)


class _HeatStepper:
    """Per-step solver with the matrices (and, for p = 1, the
    factorization) assembled once for a fixed step size."""

    def __init__(self, prob, ell, tol_factor=NEWTON_TOL_FACTOR,
                 max_iter=NEWTON_MAX_ITER, direct_threshold=DIRECT_SOLVE_MAX):
        self.op = DirichletOperator(prob.domain)
        self.p = float(prob.p)
        self.ell = float(ell)
        self.tol_factor = tol_factor
        self.max_iter = max_iter
        self.direct_threshold = direct_threshold
        self.mass = self.op.mass
        self.A = self.op.stiffness
        if self.p == 1.0:
            S = self.A + sp.diags(self.mass * (1.0 + 1.0 / self.ell))
            self._linear = CachedSPD(S, direct_threshold)
        else:
            self._linear = None

    def _functional(self, w, u_prev):
        sq = float(np.dot(self.mass * w, w))
        cross = float(np.dot(self.mass * u_prev, w))
        powr = float(np.dot(self.mass, np.abs(w) ** (self.p + 1.0)))
        grad = float(np.dot(w, self.A @ w))
        return (sq / self.ell - 2.0 * cross / self.ell
                + 2.0 / (self.p + 1.0) * powr + grad)

    def _grad_half(self, w, u_prev):
        """Half the functional gradient: mass*((w-u_prev)/l + |w|^(p-1) w)
        + A w; the pointwise Euler-Lagrange residual is this over mass."""
        return (self.mass * ((w - u_prev) / self.ell + _power(w, self.p))
                + self.A @ w)

    def solve(self, u_prev, x0=None):
        """Interior minimizer of F given the previous interior vector."""
        tol = self.tol_factor * (1.0 + float(np.max(np.abs(u_prev),
                                                    initial=0.0)))
        if self.p == 1.0:
            rhs = self.mass * u_prev / self.ell
            w = self._linear.solve(rhs)
            # one refinement round keeps the residual at rounding level
            for _ in range(3):
                G = self._grad_half(w, u_prev)
                if float(np.max(np.abs(G / self.mass), initial=0.0)) <= tol:
                    break
                w = w - self._linear.solve(G)
            return w
        w = u_prev.copy() if x0 is None else np.asarray(x0, dtype=float).copy()
        for _ in range(self.max_iter):
            G = self._grad_half(w, u_prev)
            if float(np.max(np.abs(G / self.mass), initial=0.0)) <= tol:
                return w
            dphi = self.p * np.maximum(np.abs(w),
                                       POWER_DERIV_FLOOR) ** (self.p - 1.0)
            J = self.A + sp.diags(self.mass * (1.0 / self.ell + dphi))
            s = CachedSPD(J, self.direct_threshold).solve(-G)
            fw = self._functional(w, u_prev)
            slope = 2.0 * float(np.dot(G, s))
            alpha = 1.0
            # Armijo only while the predicted decrease is measurable above
            # the rounding noise of F; near the minimum the full (damped)
            # Newton step is safe by strict convexity.
            if abs(slope) > 1e-13 * (1.0 + abs(fw)):
                while (self._functional(w + alpha * s, u_prev)
                       > fw + 1e-4 * alpha * slope and alpha > 1e-14):
                    alpha *= 0.5
            w = w + alpha * s
        raise NonConvergence(
            f"Newton did not reach residual {tol:g} in {self.max_iter} "
            f"iterations")


def solve_step(u_prev, prob, ell, x0=None, **opts):
    """One Rothe step from ``u_prev`` (admissible field) with step size l.

    ``x0`` optionally overrides the initial Newton iterate (the default is
    u_prev); the minimizer is unique, so the result must not depend on it.
    """
    dom = prob.domain
    if u_prev.graph is not dom.graph:
        raise DomainMismatch("u_prev lives on a different graph")
    require_admissible(u_prev, dom, "u_prev")
    if not (ell > 0.0):
        raise ValueError(f"step size must be positive, got {ell}")
    stepper = _HeatStepper(prob, ell, **opts)
    w0 = None if x0 is None else stepper.op.restrict(x0)
    w = stepper.solve(stepper.op.restrict(u_prev), x0=w0)
    return stepper.op.extend(w)


def run_rothe(prob, part, **opts):
    """Full Rothe sequence on a finite domain."""
    if not isinstance(prob.domain, Domain):
        raise TypeError("run_rothe needs a finite Domain; "
                        "use run_exhaustion for exhaustion targets")
    stepper = _HeatStepper(prob, part.step_size, **opts)
    w = stepper.op.restrict(prob.initial)
    fields = [stepper.op.extend(w)]
    for _ in range(part.steps):
        w = stepper.solve(w)
        fields.append(stepper.op.extend(w))
    return RotheTrajectory(prob, part, tuple(fields))


def evaluate_interpolant(traj, t, kind="linear"):
    """Piecewise-linear Rothe interpolant, or the piecewise-constant step
    reconstruction (which also extends to t in [-l, 0] with the initial
    field)."""
    part = traj.partition
    ell = part.step_size
    n = part.steps
    grid = part.times
    idx = int(np.searchsorted(grid, t))
    if idx <= n and math.isclose(t, grid[idx] if idx <= n else 0.0,
                                 rel_tol=0.0, abs_tol=1e-14 * part.horizon):
        exact = idx
    elif idx >= 1 and math.isclose(t, grid[idx - 1], rel_tol=0.0,
                                   abs_tol=1e-14 * part.horizon):
        exact = idx - 1
    else:
        exact = None
    if kind == "linear":
        if t < 0.0 or t > part.horizon:
            raise TimeOutOfRange(f"t = {t} outside [0, {part.horizon}]")
        if exact is not None:
            return traj.fields[exact]
        i = min(max(idx, 1), n)
        g = traj.fields[0].graph
        du = (traj.fields[i].values - traj.fields[i - 1].values) / ell
        return VertexField(g, traj.fields[i - 1].values
                           + (t - grid[i - 1]) * du)
    if kind == "step":
        if t < -ell - 1e-14 * part.horizon or t > part.horizon:
            raise TimeOutOfRange(f"t = {t} outside [{-ell}, {part.horizon}]")
        if t <= 0.0:
            return traj.fields[0]
        if exact is not None:
            return traj.fields[exact]
        return traj.fields[min(max(idx, 1), n)]
    raise ValueError(f"unknown interpolant kind {kind!r}")


@dataclass(frozen=True)
class StepEstimate:
    """Per-step monitored quantities; ``r`` and ``d`` are the one-step
    energy-inequality residual and the discrete energy-production defect,
    both <= 0 up to solver residual at the exact minimizer."""

    index: int
    l2: float
    grad_l2: float
    l2p: float
    delta_l2: float
    r: float
    d: float


@dataclass(frozen=True)
class EstimateReport:
    rows: tuple

    @property
    def max_r(self):
        return max((row.r for row in self.rows if row.index > 0),
                   default=0.0)

    @property
    def max_d(self):
        return max((row.d for row in self.rows if row.index > 0),
                   default=0.0)

    def l2_values(self):
        return [row.l2 for row in self.rows]


def monitor_estimates(traj, prob=None):
    """Norm and energy monitors along a trajectory.

    Row i >= 1 reports, for u_i: the L2(Omega) norm, gradient L2 norm,
    L^{2p}(Omega) norm, the quotient norm |delta u_i|, and

        r_i = I(u_i^2) + l (I(|u_i|^{p+1}) + E(u_i))
              - (I(u_i^2) + I(u_{i-1}^2)) / 2,
        d_i = (I(u_i^2) - I(u_{i-1}^2)) / l + 2 I(|u_i|^{p+1}) + 2 E(u_i),

    with I the interior integral and E the gradient energy over Omega.
    Row 0 carries the initial norms with r, d, delta as NaN.
    """
    prob = traj.problem if prob is None else prob
    dom = prob.domain
    g = dom.graph
    ell = traj.partition.step_size
    p = prob.p
    rows = []
    prev_sq = None
    for i, u in enumerate(traj.fields):
        nb = calculus.norms(g, u, dom, q=2.0 * p)
        sq = nb.l2_interior ** 2
        powr = calculus.integrate(
            g, VertexField(g, np.abs(u.values) ** (p + 1.0)),
            dom.interior_ids)
        grad_sq = nb.grad_l2 ** 2
        if i == 0:
            rows.append(StepEstimate(0, nb.l2_domain, nb.grad_l2, nb.lq,
                                     math.nan, math.nan, math.nan))
        else:
            du = VertexField(g, (u.values - traj.fields[i - 1].values) / ell)
            delta_l2 = calculus.norms(g, du, dom).l2_domain
            r = sq + ell * (powr + grad_sq) - 0.5 * (sq + prev_sq)
            d = (sq - prev_sq) / ell + 2.0 * powr + 2.0 * grad_sq
            rows.append(StepEstimate(i, nb.l2_domain, nb.grad_l2, nb.lq,
                                     delta_l2, r, d))
        prev_sq = sq
    return EstimateReport(tuple(rows))


@dataclass(frozen=True)
class LevelResult:
    """One exhaustion level: ball radius, its domain, the trajectory, and
    the L2(Omega_prev) distance between this and the previous level's
    terminal fields (None on the first level)."""

    level: int
    domain: Domain
    trajectory: RotheTrajectory
    delta_prev: object


def _level_delta(g, prev_dom, u_prev, u_cur):
    ids = prev_dom.omega_ids
    diff = u_cur.values[ids] - u_prev.values[ids]
    return math.sqrt(kernels.seq_sum(
        np.ascontiguousarray(g.mu[ids] * diff * diff)))


def restrict_initial(initial, dom):
    """h restricted to the level interior and zero elsewhere."""
    return field_on_interior(dom, initial.values[dom.interior_ids])


def run_exhaustion(prob, part, levels=None, **opts):
    """Rothe runs over exhaustion levels with cross-level terminal deltas.

    ``prob.domain`` must be an ExhaustionSequence; ``levels`` selects ball
    radii (default: every level). The initial field lives on the ambient
    graph and is restricted per level.
    """
    exh = prob.domain
    if not isinstance(exh, ExhaustionSequence):
        raise TypeError("run_exhaustion needs an ExhaustionSequence domain")
    radii = list(exh.radii) if levels is None else list(levels)
    results = []
    prev = None
    for m in radii:
        dom = exh.level(m)
        if not dom.interior:
            raise EmptyInterior(f"exhaustion level {m} has empty interior")
        sub = HeatProblem(dom, prob.p, restrict_initial(prob.initial, dom),
                          prob.horizon)
        traj = run_rothe(sub, part, **opts)
        delta = None
        if prev is not None:
            prev_dom, prev_traj = prev
            delta = _level_delta(exh.graph, prev_dom,
                                 prev_traj.fields[-1], traj.fields[-1])
        results.append(LevelResult(m, dom, traj, delta))
        prev = (dom, traj)
    return results
