import numpy as np
import pytest

from slpcc.auglag import (AuglagConfig, AuglagState, GeneralMpcc,
                          NASH1_REFERENCE, auglag_solve, build_subproblem,
                          nash1_problem)
from slpcc.bench import nash1a_objective


def fd_gradient(f, x, h=1e-6):
    g = np.zeros(x.size)
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def state(gp, y=None, z_g=None, z_h=None, rho=1.0):
    return AuglagState(
        y=np.zeros(gp.m) if y is None else np.asarray(y, float),
        z_g=np.zeros(gp.p) if z_g is None else np.asarray(z_g, float),
        z_h=np.zeros(gp.p) if z_h is None else np.asarray(z_h, float),
        rho=rho, omega=1e-2, eta=1e-1)


class TestBuildSubproblem:
    def test_zero_multipliers_feasible_point_gives_plain_objective(self):
        gp = nash1_problem()
        sub = build_subproblem(gp, state(gp, rho=7.0))
        x = np.array([5.0, 9.0, 5.0, 9.0])
        v = np.concatenate([x, gp.g(x), gp.h(x)])  # slacks match: residuals 0
        assert sub.f(v) == pytest.approx(gp.f(x), abs=1e-12)

    def test_nash1_value_at_origin(self):
        gp = nash1_problem()
        sub = build_subproblem(gp, state(gp, rho=1.0))
        v = np.zeros(8)
        # f(0) = 0 plus half the squared residuals of all four constraints.
        expected = 0.5 * (15.0**2 + 15.0**2 + 34.0**2 + 24.25**2)
        assert sub.f(v) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(1097.03125)

    def test_gradient_matches_finite_differences(self):
        gp = nash1_problem()
        st = state(gp, z_g=[0.3, -1.2], z_h=[2.0, 0.7], rho=3.0)
        sub = build_subproblem(gp, st)
        rng = np.random.default_rng(6)
        for _ in range(10):
            v = rng.uniform(-2, 2, 8)
            g_fd = fd_gradient(sub.f, v)
            scale = max(1.0, np.max(np.abs(g_fd)))
            assert np.max(np.abs(sub.grad(v) - g_fd)) / scale < 1e-6

    def test_hessian_exact_for_linear_constraints(self):
        gp = nash1_problem()
        sub = build_subproblem(gp, state(gp, rho=2.5))
        rng = np.random.default_rng(3)
        H = sub.hess(np.zeros(8))
        for _ in range(5):
            a, b = rng.uniform(-3, 3, 8), rng.uniform(-3, 3, 8)
            lhs = sub.f(a) - sub.f(b) - sub.grad(b) @ (a - b)
            rhs = 0.5 * (a - b) @ (H @ (a - b))
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    def test_matches_builtin_quadratic_example_objective(self):
        # The built-in quadratic demo objective is this subproblem with the
        # published multipliers folded in.
        gp = nash1_problem()
        lam = (3.9375, -6.5, -0.25, 2.5)
        st = state(gp, z_g=[lam[2], -lam[3]], z_h=[-lam[0], lam[1]], rho=2.0)
        sub = build_subproblem(gp, st)
        ref = nash1a_objective()
        rng = np.random.default_rng(12)
        for _ in range(20):
            v = rng.uniform(-4, 4, 8)
            assert sub.f(v) == pytest.approx(ref.f(v), rel=1e-12, abs=1e-9)
            assert np.allclose(sub.grad(v), ref.grad(v), atol=1e-8)

    def test_infinite_bounds_folded(self):
        gp = nash1_problem()
        sub = build_subproblem(gp, state(gp))
        assert sub.l0[2] == -1e10 and sub.u0[3] == 1e10
        assert sub.l0[0] == 0.0 and sub.u0[0] == 10.0


class TestMultiplierUpdate:
    def test_first_order_update_identity(self):
        # After z <- z - rho*r0, the new Lagrangian gradient differs from the
        # old one by rho * J^T r0 at the update point.
        gp = nash1_problem()
        st_old = state(gp, z_g=[0.4, -0.6], z_h=[1.0, 0.2], rho=5.0)
        sub_old = build_subproblem(gp, st_old)
        rng = np.random.default_rng(8)
        v = rng.uniform(-1, 3, 8)
        x, sg, sh = v[:4], v[4:6], v[6:]
        rg = sg - gp.g(x)
        rh = sh - gp.h(x)
        st_new = state(gp, z_g=st_old.z_g - st_old.rho * rg,
                       z_h=st_old.z_h - st_old.rho * rh, rho=st_old.rho)
        sub_new = build_subproblem(gp, st_new)
        # Jacobian of the stacked residuals (s - g(x), s - h(x)) w.r.t. v.
        J = np.zeros((4, 8))
        J[:2, :4] = -gp.jac_g(x)
        J[:2, 4:6] = np.eye(2)
        J[2:, :4] = -gp.jac_h(x)
        J[2:, 6:] = np.eye(2)
        delta = sub_new.grad(v) - sub_old.grad(v)
        expected = st_old.rho * (J.T @ np.concatenate([rg, rh]))
        assert np.allclose(delta, expected, atol=1e-9)


class TestAuglagSolve:
    def test_nash1_converges_to_reference_point(self):
        rep = auglag_solve(nash1_problem(), x_init=np.full(4, 10.0))
        assert rep.status == "converged"
        assert np.max(np.abs(rep.final_point - NASH1_REFERENCE)) <= 1e-6
        assert rep.records[-1].violation <= 1e-8
        assert rep.records[-1].stationarity <= 1e-8
        assert rep.rho <= 1e4

    def test_all_subproblem_iterates_exactly_complementary(self):
        rep = auglag_solve(nash1_problem(), x_init=np.full(4, 10.0))
        assert np.all(rep.s_g * rep.s_h == 0.0)
        for sr in rep.subproblem_reports:
            assert np.all(sr.final_point.x1 * sr.final_point.x2 == 0.0)

    def test_zero_start_finds_a_stationary_point_with_monotone_penalty(self):
        rep = auglag_solve(nash1_problem())
        assert rep.status == "converged"
        rhos = [r.rho for r in rep.records]
        assert all(a <= b for a, b in zip(rhos[:-1], rhos[1:]))
        assert rep.records[-1].violation <= 1e-8

    def test_uncoupled_problem_converges_in_one_subproblem(self):
        # g, h are coordinate selections and the bound keeps the objective
        # minimizer feasible, so the first subproblem already solves it.
        def f(x):
            return float((x[0] - 2.0) ** 2 + (x[1] + 1.0) ** 2)

        gp = GeneralMpcc(
            n=2, m=0, p=1,
            f=f,
            grad_f=lambda x: np.array([2 * (x[0] - 2.0), 2 * (x[1] + 1.0)]),
            hess_f=lambda x: 2 * np.eye(2),
            g=lambda x: x[:1], jac_g=lambda x: np.array([[1.0, 0.0]]),
            h=lambda x: x[1:], jac_h=lambda x: np.array([[0.0, 1.0]]),
            lx=np.zeros(2), ux=np.array([10.0, 10.0]),
            linear_constraints=True, name="uncoupled")
        rep = auglag_solve(gp)
        assert rep.status == "converged"
        assert len(rep.records) == 1
        assert np.allclose(rep.x, [2.0, 0.0], atol=1e-7)
        assert rep.records[0].violation <= 1e-8

    def test_penalty_overflow_reported(self):
        # Inconsistent constraints: c(x) = 1 has no solution.
        gp = GeneralMpcc(
            n=1, m=1, p=1,
            f=lambda x: 0.0,
            grad_f=lambda x: np.zeros(1),
            hess_f=lambda x: np.zeros((1, 1)),
            g=lambda x: x[:1], jac_g=lambda x: np.eye(1),
            h=lambda x: np.zeros(1), jac_h=lambda x: np.zeros((1, 1)),
            c=lambda x: np.ones(1), jac_c=lambda x: np.zeros((1, 1)),
            lx=np.zeros(1), ux=np.ones(1), linear_constraints=True)
        cfg = AuglagConfig(penalty_max=1e6, max_outer=30)
        rep = auglag_solve(gp, cfg)
        assert rep.status == "penalty_overflow"
