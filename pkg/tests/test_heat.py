import math
import warnings

import numpy as np
import pytest

from graphrothe import (
    HeatProblem,
    LatticeZ,
    TimePartition,
    VertexField,
    evaluate_interpolant,
    exhaust,
    exhaust_generative,
    field_on_interior,
    make_domain,
    monitor_estimates,
    norms,
    run_exhaustion,
    run_rothe,
    solve_step,
    step_functional,
)
from graphrothe.errors import DomainMismatch, TimeOutOfRange
from helpers import (
    five_path_domain,
    path_graph,
    random_admissible,
    random_connected_graph,
    random_domain,
)


def bisect_root(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def single_interior_problem(p=1.0, value=1.0):
    g, dom = five_path_domain()
    h = VertexField.from_mapping(g, {2: value})
    return g, dom, HeatProblem(dom, p, h, 1.0)


class TestTimePartition:
    def test_grid(self):
        part = TimePartition(0.3, 7)
        t = part.times
        assert t[0] == 0.0 and t[-1] == 0.3
        ell = part.step_size
        # spacing uniform to one ulp at the horizon scale
        for a, b in zip(t, t[1:]):
            assert abs((b - a) - ell) <= np.spacing(part.horizon)

    def test_validation(self):
        with pytest.raises(ValueError):
            TimePartition(0.0, 5)
        with pytest.raises(ValueError):
            TimePartition(1.0, 0)


class TestStepFunctional:
    def test_hand_quadratic(self):
        # single interior vertex, p=1, l=0.1: F(c) = 13 c^2 - 20 c
        g, dom, prob = single_interior_problem()
        for c in (0.0, 0.3, 10.0 / 13.0, -1.2):
            u = field_on_interior(dom, [c])
            assert step_functional(u, prob.initial, prob, 0.1) \
                == pytest.approx(13.0 * c * c - 20.0 * c, abs=1e-12)

    def test_zero_field_zero_value(self):
        g, dom, prob = single_interior_problem()
        z = VertexField.zeros(g)
        assert step_functional(z, prob.initial, prob, 0.1) == 0.0

    def test_domain_mismatch(self):
        g, dom, prob = single_interior_problem()
        other = path_graph(5)
        with pytest.raises(DomainMismatch):
            step_functional(VertexField.zeros(other), prob.initial, prob, 0.1)


class TestSolveStep:
    def test_p1_closed_form(self):
        g, dom, prob = single_interior_problem()
        u = solve_step(prob.initial, prob, 0.1)
        assert u[2] == pytest.approx(10.0 / 13.0, abs=1e-14)
        assert u[0] == u[1] == u[3] == u[4] == 0.0

    def test_zero_invariance(self):
        g, dom, prob = single_interior_problem()
        z = VertexField.zeros(g)
        u = solve_step(z, prob, 0.1)
        assert np.all(u.values == 0.0)

    def test_p3_against_bisection_oracle(self):
        # Euler-Lagrange at the single vertex: 10(u-1) + u^3 + 2u = 0
        root = bisect_root(lambda u: 10.0 * (u - 1.0) + u ** 3 + 2.0 * u,
                           0.0, 1.0)
        assert root == pytest.approx(0.791942867912496, abs=1e-12)
        g, dom, prob = single_interior_problem(p=3.0)
        u = solve_step(prob.initial, prob, 0.1)
        assert u[2] == pytest.approx(root, abs=1e-12)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
    def test_euler_lagrange_residual(self, p):
        from graphrothe import laplacian
        rng = np.random.default_rng(int(p * 10))
        for _ in range(5):
            g = random_connected_graph(rng, 5, 25)
            dom = random_domain(rng, g)
            u_prev = random_admissible(rng, dom)
            prob = HeatProblem(dom, p, u_prev, 1.0)
            ell = float(rng.uniform(0.02, 0.5))
            u = solve_step(u_prev, prob, ell)
            tol = 1e-10 * (1.0 + float(np.max(np.abs(u_prev.values))))
            for x in sorted(dom.interior):
                res = ((u.values[x] - u_prev.values[x]) / ell
                       + abs(u.values[x]) ** (p - 1.0) * u.values[x]
                       - laplacian(g, u, x))
                assert abs(res) <= tol

    def test_minimizer_optimality(self):
        rng = np.random.default_rng(77)
        g = random_connected_graph(rng, 8, 20)
        dom = random_domain(rng, g)
        u_prev = random_admissible(rng, dom)
        prob = HeatProblem(dom, 2.0, u_prev, 1.0)
        u = solve_step(u_prev, prob, 0.1)
        fu = step_functional(u, u_prev, prob, 0.1)
        for _ in range(20):
            phi = random_admissible(rng, dom)
            for eps in (1e-3, -1e-3):
                pert = VertexField(g, u.values + eps * phi.values)
                assert step_functional(pert, u_prev, prob, 0.1) \
                    >= fu - 1e-12 * (1.0 + abs(fu))

    def test_initialization_independence(self):
        rng = np.random.default_rng(5)
        for p in (1.5, 2.0, 3.0):
            g = random_connected_graph(rng, 5, 20)
            dom = random_domain(rng, g)
            u_prev = random_admissible(rng, dom)
            prob = HeatProblem(dom, p, u_prev, 1.0)
            a = solve_step(u_prev, prob, 0.1)
            b = solve_step(u_prev, prob, 0.1, x0=VertexField.zeros(g))
            assert float(np.max(np.abs(a.values - b.values))) <= 1e-8

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
    def test_gradient_matches_finite_differences(self, p):
        rng = np.random.default_rng(int(31 * p))
        g = random_connected_graph(rng, 5, 12)
        dom = random_domain(rng, g)
        u_prev = random_admissible(rng, dom)
        prob = HeatProblem(dom, p, u_prev, 1.0)
        ell = 0.1
        from graphrothe import laplacian
        u = random_admissible(rng, dom)
        ids = list(dom.interior_ids)
        h = 1e-6
        for a, x in enumerate(ids):
            up = u.values.copy()
            up[x] += h
            dn = u.values.copy()
            dn[x] -= h
            fd = (step_functional(VertexField(g, up), u_prev, prob, ell)
                  - step_functional(VertexField(g, dn), u_prev, prob, ell)) \
                / (2.0 * h)
            an = 2.0 * g.mu[x] * (
                (u.values[x] - u_prev.values[x]) / ell
                + abs(u.values[x]) ** (p - 1.0) * u.values[x]
                - laplacian(g, u, x))
            assert abs(fd - an) <= 1e-5 * (1.0 + abs(an))


class TestRunRothe:
    def test_n1_is_single_step(self):
        g, dom, prob = single_interior_problem()
        traj = run_rothe(prob, TimePartition(0.1, 1))
        step = solve_step(prob.initial, prob, 0.1)
        assert np.array_equal(traj.fields[1].values, step.values)

    def test_zero_initial(self):
        g, dom, prob = single_interior_problem(value=0.0)
        traj = run_rothe(prob, TimePartition(1.0, 10))
        for u in traj.fields:
            assert np.all(u.values == 0.0)

    def test_l2_monotone(self):
        rng = np.random.default_rng(17)
        for p in (1.0, 2.0, 3.0):
            g = random_connected_graph(rng, 5, 25)
            dom = random_domain(rng, g)
            h = random_admissible(rng, dom)
            prob = HeatProblem(dom, p, h, 0.5)
            traj = run_rothe(prob, TimePartition(0.5, 20))
            report = monitor_estimates(traj)
            l2 = report.l2_values()
            scale = 1.0 + l2[0]
            for a, b in zip(l2, l2[1:]):
                assert b <= a + 1e-12 * scale

    def test_endpoint_near_exact_decay(self):
        # first-order scheme: |1.003^-1000 - e^-3| = 2.241e-4
        g, dom, prob = single_interior_problem()
        traj = run_rothe(prob, TimePartition(1.0, 1000))
        assert traj.fields[-1][2] == pytest.approx(math.exp(-3.0),
                                                   abs=2.5e-4)

    def test_first_order_in_time(self):
        g, dom, prob = single_interior_problem()
        errors = []
        for n in (125, 250, 500, 1000):
            traj = run_rothe(prob, TimePartition(1.0, n))
            times = traj.partition.times
            err = max(abs(traj.fields[i][2] - math.exp(-3.0 * times[i]))
                      for i in range(n + 1))
            errors.append(err)
        for e1, e2 in zip(errors, errors[1:]):
            assert 1.8 <= e1 / e2 <= 2.2


class TestInterpolant:
    def setup_method(self):
        g, dom, prob = single_interior_problem()
        self.traj = run_rothe(prob, TimePartition(1.0, 10))

    def test_grid_points(self):
        part = self.traj.partition
        for i in (0, 3, 10):
            t = float(part.times[i])
            for kind in ("linear", "step"):
                u = evaluate_interpolant(self.traj, t, kind)
                assert np.array_equal(u.values, self.traj.fields[i].values)

    def test_midpoint_linear(self):
        part = self.traj.partition
        t = 0.5 * (part.times[0] + part.times[1])
        u = evaluate_interpolant(self.traj, float(t), "linear")
        expect = 0.5 * (self.traj.fields[0].values
                        + self.traj.fields[1].values)
        assert np.allclose(u.values, expect, rtol=0.0, atol=1e-15)

    def test_step_initial_extension(self):
        ell = self.traj.partition.step_size
        u = evaluate_interpolant(self.traj, -0.5 * ell, "step")
        assert np.array_equal(u.values, self.traj.fields[0].values)
        mid = evaluate_interpolant(self.traj, 0.25 * ell, "step")
        assert np.array_equal(mid.values, self.traj.fields[1].values)

    def test_out_of_range(self):
        with pytest.raises(TimeOutOfRange):
            evaluate_interpolant(self.traj, -0.01, "linear")
        with pytest.raises(TimeOutOfRange):
            evaluate_interpolant(self.traj, 1.01, "linear")
        ell = self.traj.partition.step_size
        with pytest.raises(TimeOutOfRange):
            evaluate_interpolant(self.traj, -1.5 * ell, "step")

    def test_gap_between_interpolants_bounded(self):
        g = self.traj.fields[0].graph
        dom = self.traj.problem.domain
        ell = self.traj.partition.step_size
        bound = max(norms(g, q, dom).l2_domain
                    for q in self.traj.quotients) * ell
        worst = 0.0
        for t in np.linspace(0.0, 1.0, 101):
            lin = evaluate_interpolant(self.traj, float(t), "linear")
            stp = evaluate_interpolant(self.traj, float(t), "step")
            diff = VertexField(g, lin.values - stp.values)
            worst = max(worst, norms(g, diff, dom).l2_domain)
        assert worst <= bound + 1e-14


class TestMonitor:
    def test_zero_data(self):
        g, dom, prob = single_interior_problem(value=0.0)
        report = monitor_estimates(run_rothe(prob, TimePartition(1.0, 5)))
        for row in report.rows[1:]:
            assert row.l2 == row.grad_l2 == row.l2p == row.delta_l2 == 0.0
            assert row.r == 0.0 and row.d == 0.0

    def test_energy_residual_single_interior(self):
        g, dom, prob = single_interior_problem()
        report = monitor_estimates(run_rothe(prob, TimePartition(1.0, 50)))
        scale = (1.0 + 1.0) ** 2
        assert report.max_r <= 1e-10 * scale

    def test_energy_defect_random(self):
        rng = np.random.default_rng(23)
        for p in (1.0, 2.0):
            g = random_connected_graph(rng, 5, 20)
            dom = random_domain(rng, g)
            h = random_admissible(rng, dom)
            prob = HeatProblem(dom, p, h, 0.5)
            report = monitor_estimates(run_rothe(prob, TimePartition(0.5, 20)))
            scale = (1.0 + report.rows[0].l2) ** 2
            assert report.max_r <= 1e-10 * scale
            assert report.max_d <= 1e-10 * scale


class TestExhaustion:
    def test_finite_domain_stabilizes_with_zero_delta(self):
        g = path_graph(6)
        dom = make_domain(g, range(6))
        exh = exhaust(dom, [0], 8)
        h = VertexField.indicator(g, 2)
        prob = HeatProblem(exh, 1.0, h, 0.5)
        results = run_exhaustion(prob, TimePartition(0.5, 10),
                                 levels=[5, 6, 7, 8])
        assert results[1].delta_prev == 0.0
        assert results[2].delta_prev == 0.0

    def test_support_enters_late(self):
        exh = exhaust_generative(LatticeZ(), [0], 10)
        h = VertexField.from_mapping(exh.graph, {7: 1.0})
        prob = HeatProblem(exh, 1.0, h, 0.5)
        results = run_exhaustion(prob, TimePartition(0.5, 10),
                                 levels=[3, 5, 10])
        assert np.all(results[0].trajectory.fields[-1].values == 0.0)
        assert np.all(results[1].trajectory.fields[-1].values == 0.0)
        assert results[1].delta_prev == 0.0
        assert results[2].delta_prev > 0.0

    def test_z_lattice_delta_decay(self):
        exh = exhaust_generative(LatticeZ(), [0], 16)
        h = VertexField.from_mapping(exh.graph, {0: 1.0})
        prob = HeatProblem(exh, 1.0, h, 1.0)
        results = run_exhaustion(prob, TimePartition(1.0, 50),
                                 levels=[4, 8, 12, 16])
        deltas = [r.delta_prev for r in results[1:]]
        assert all(d > 0 for d in deltas)
        assert deltas[0] > deltas[1] > deltas[2]


class TestLinearSolverPaths:
    def test_cg_path_matches_direct(self):
        # force the iterative branch by dropping the direct-solve threshold
        rng = np.random.default_rng(71)
        for p in (1.0, 2.0):
            g = random_connected_graph(rng, 10, 30)
            dom = random_domain(rng, g)
            u_prev = random_admissible(rng, dom)
            prob = HeatProblem(dom, p, u_prev, 1.0)
            a = solve_step(u_prev, prob, 0.1)
            b = solve_step(u_prev, prob, 0.1, direct_threshold=0)
            assert float(np.max(np.abs(a.values - b.values))) <= 1e-9


class TestSolverBudget:
    def test_newton_budget_exhausted(self):
        from graphrothe.errors import NonConvergence
        g, dom, prob = single_interior_problem(p=3.0)
        with pytest.raises(NonConvergence):
            solve_step(prob.initial, prob, 0.1, max_iter=1,
                       x0=VertexField.zeros(g))


class TestProblemValidation:
    def test_p_below_one(self):
        g, dom = five_path_domain()
        with pytest.raises(ValueError):
            HeatProblem(dom, 0.5, VertexField.zeros(g), 1.0)

    def test_initial_not_admissible(self):
        from graphrothe.errors import NotDirichletAdmissible
        g, dom = five_path_domain()
        with pytest.raises(NotDirichletAdmissible):
            HeatProblem(dom, 1.0, VertexField.indicator(g, 0), 1.0)

    def test_empty_interior(self):
        from graphrothe.errors import EmptyInterior, EmptyInteriorWarning
        g = path_graph(5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyInteriorWarning)
            dom = make_domain(g, [2])
        with pytest.raises(EmptyInterior):
            HeatProblem(dom, 1.0, VertexField.zeros(g), 1.0)
