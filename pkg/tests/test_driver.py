import numpy as np
import pytest

from slpcc import (MpccProblem, PartitionedPoint, SolverConfig, accept_ratio,
                   is_feasible, slpcc_solve)

from conftest import pair_point, random_problem


def fig2_config(**kw):
    base = dict(sigma=0.25, delta_min=0.5, delta_bar0=2.0,
                variant="first_order")
    base.update(kw)
    return SolverConfig(**base)


class TestAcceptRatio:
    def test_first_step_of_cubic_example(self):
        # f(2) = 8, f(1.5) = 3.375, predicted 6.
        assert accept_ratio(8.0, 3.375, 6.0) == pytest.approx(0.77083333333, abs=1e-10)

    def test_exact_linear_model(self):
        assert accept_ratio(5.0, 3.0, 2.0) == 1.0

    def test_no_reduction(self):
        assert accept_ratio(5.0, 5.0, 2.0) == 0.0

    def test_nonpositive_predicted_rejected(self):
        with pytest.raises(ValueError):
            accept_ratio(5.0, 4.0, 0.0)


class TestCubicExample:
    def test_reproduces_reference_trajectory(self, cubic_problem):
        report = slpcc_solve(cubic_problem, pair_point(2.0, 0.0), fig2_config())
        assert report.status == "b_stationary"
        pts = [(2.0, 0.0), (1.5, 0.0), (0.5, 0.0), (0.0, 1.0)]
        assert len(report.iterates) == 4
        assert [r.f for r in report.iterates] == pytest.approx(
            [8.0, 3.375, 0.125, -0.5], abs=1e-15)
        assert report.outer_iters == 3
        assert report.final_f == pytest.approx(-0.5, abs=1e-15)
        assert report.final_point.x1[0] == 0.0
        assert report.final_point.x2[0] == 1.0
        deltas = [r.delta for r in report.iterates[:-1]]
        assert deltas == [0.5, 1.0, 1.0]
        del pts

    def test_start_at_minimizer_terminates_immediately(self, cubic_problem):
        report = slpcc_solve(cubic_problem, pair_point(0.0, 1.0), fig2_config())
        assert report.status == "b_stationary"
        assert report.outer_iters == 0
        assert report.final_chi == 0.0

    def test_degenerate_starts_turn_the_corner(self, cubic_problem):
        rng = np.random.default_rng(99)
        for t in rng.uniform(1e-3, 2.0 - 1e-3, 20):
            report = slpcc_solve(cubic_problem, pair_point(t, 0.0), fig2_config())
            assert report.converged
            assert not (report.final_point.x1[0] == 0.0 and report.final_point.x2[0] == 0.0)
            assert report.final_f == pytest.approx(-0.5, abs=1e-8)

    def test_infeasible_start_rejected(self, cubic_problem):
        with pytest.raises(ValueError):
            slpcc_solve(cubic_problem, pair_point(1.0, 1.0), fig2_config())


class TestInvariants:
    def test_descent_and_feasibility_on_random_problems(self):
        # Unconstrained pair coordinates make many random indefinite
        # quadratics unbounded below; that is a legitimate terminal status.
        rng = np.random.default_rng(1234)
        for _ in range(40):
            prob, p = random_problem(rng)
            cfg = SolverConfig(sigma=0.1, delta_min=0.5, delta_bar0=4.0,
                               variant="plain", max_outer=300,
                               stationarity_tol=1e-9)
            report = slpcc_solve(prob, p, cfg)
            fs = [r.f for r in report.iterates]
            assert all(a > b for a, b in zip(fs[:-1], fs[1:])) or len(fs) <= 1
            assert is_feasible(report.final_point, prob)
            assert report.status in ("b_stationary", "tolerance_reached", "unbounded")

    def test_unbounded_detection(self):
        prob = MpccProblem(n0=1, n1=0, l0=[-1e11], u0=[1e11],
                           f=lambda x: float(x[0]),
                           grad=lambda x: np.ones(1))
        report = slpcc_solve(prob, PartitionedPoint([0.0], [], []),
                             SolverConfig(variant="first_order",
                                          unbounded_cutoff=1e6,
                                          max_outer=2000))
        assert report.status == "unbounded"
        assert report.final_f <= -1e6

    def test_iteration_limit(self, cubic_problem):
        report = slpcc_solve(cubic_problem, pair_point(2.0, 0.0),
                             fig2_config(max_outer=1))
        assert report.status == "iteration_limit"
        assert len(report.iterates) == 2

    def test_all_reset_policies_converge(self, cubic_problem):
        for policy in ("adaptive", "always_delta_bar", "always_delta_min"):
            report = slpcc_solve(cubic_problem, pair_point(2.0, 0.0),
                                 fig2_config(reset_policy=policy))
            assert report.converged
            assert report.final_f == pytest.approx(-0.5, abs=1e-9)

    def test_stall_reported_when_reductions_drown_in_cancellation(self):
        # A huge constant offset makes reductions near the minimizer smaller
        # than one ulp of f, so the ratio test must eventually jam; without
        # second-order rescue this is reported as a stall, not success.
        off = 1e12
        prob = MpccProblem(n0=1, n1=0, l0=[-10.0], u0=[10.0],
                           f=lambda x: off + 0.5 * float((x[0] - 0.3) ** 2),
                           grad=lambda x: x - 0.3)
        report = slpcc_solve(prob, PartitionedPoint([5.0], [], []),
                             SolverConfig(variant="first_order",
                                          stationarity_tol=1e-14,
                                          max_outer=500))
        assert report.status == "inner_loop_stall"
        assert abs(report.final_point.x0[0] - 0.3) < 1e-2

    def test_oracle_nan_raises(self):
        prob = MpccProblem(n0=1, n1=0, l0=[-1.0], u0=[1.0],
                           f=lambda x: float("nan"),
                           grad=lambda x: np.ones(1))
        with pytest.raises(ValueError):
            slpcc_solve(prob, PartitionedPoint([0.0], [], []),
                        SolverConfig(variant="first_order"))


class TestTolerance:
    def test_tolerance_reached_status(self):
        # Smooth interior minimum reached only approximately by first-order
        # steps: chi shrinks below the tolerance rather than hitting zero.
        prob = MpccProblem(n0=1, n1=0, l0=[-10.0], u0=[10.0],
                           f=lambda x: float(0.5 * (x[0] - 0.3) ** 2),
                           grad=lambda x: np.array([x[0] - 0.3]))
        report = slpcc_solve(prob, PartitionedPoint([5.0], [], []),
                             SolverConfig(variant="first_order",
                                          stationarity_tol=1e-6,
                                          max_outer=500))
        assert report.status in ("tolerance_reached", "b_stationary")
        assert report.final_chi <= 1e-6
        assert abs(report.final_point.x0[0] - 0.3) <= 1e-5
