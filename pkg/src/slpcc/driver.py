"""Outer/inner trust-region loop with B-stationarity certification.

The outer loop resets the trust radius, the inner loop halves it until a
trial step passes the acceptance test; a zero subproblem step certifies
B-stationarity exactly.  Optional second-order machinery (Cauchy search,
BQP steps) hooks into the loop without affecting the termination logic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bqp import bqp_step
from .cauchy import _cauchy_candidate
from .core import (MpccProblem, PartitionedPoint, SolverConfig, Vector,
                   is_feasible, make_point)
from .lpcc import solve_lpcc

STEP_LPCC = "lpcc"
STEP_CAUCHY = "cauchy"
STEP_BQP = "bqp"
STEP_NONE = "none"


@dataclass(frozen=True)
class IterateRecord:
    k: int
    f: float
    chi: float
    delta: Optional[float]
    step_type: str
    inner_iters: int
    bqp_iters: int
    point: Optional[PartitionedPoint] = None


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve.

    ``status`` is one of b_stationary, tolerance_reached, unbounded,
    inner_loop_stall, iteration_limit.  ``iterates`` holds one record per
    visited outer iterate (monotonically decreasing f); ``outer_iters``
    counts accepted steps.
    """

    status: str
    iterates: list
    outer_iters: int
    total_inner_iters: int
    bqp_iters: int
    final_point: PartitionedPoint
    final_f: float
    final_chi: float

    @property
    def converged(self) -> bool:
        return self.status in ("b_stationary", "tolerance_reached")


def accept_ratio(f_old: float, f_new: float, predicted: float) -> float:
    """Actual over linearly predicted reduction; predicted must be positive."""
    if predicted <= 0.0:
        raise ValueError("predicted reduction must be positive")
    return (f_old - f_new) / predicted


def _reset_radius(cfg: SolverConfig, prev_accepted: Optional[float], delta_bar: float) -> float:
    if cfg.reset_policy == "always_delta_bar":
        return delta_bar
    if cfg.reset_policy == "always_delta_min":
        return cfg.delta_min
    if prev_accepted is None:
        return cfg.delta_init if cfg.delta_init is not None else cfg.delta_min
    return min(max(2.0 * prev_accepted, cfg.delta_min), delta_bar)


def _checked_value(prob: MpccProblem, x: Vector) -> float:
    fx = float(prob.f(x))
    if not np.isfinite(fx):
        raise ValueError("objective oracle returned a non-finite value at a feasible point")
    return fx


def _checked_grad(prob: MpccProblem, x: Vector) -> Vector:
    g = np.asarray(prob.grad(x), dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient oracle returned non-finite values at a feasible point")
    return g


def _local_rate(x: PartitionedPoint, g: Vector, prob: MpccProblem, r: float) -> float:
    """Best per-coordinate descent rate within radius r (max-norm residual).

    The subproblem separates, so this vanishes exactly iff its full solution
    does; aggregating per coordinate by max instead of summing matches the
    usual projected-gradient residual convention.
    """
    step = solve_lpcc(x, g, prob, r)
    g0, g1, g2 = prob.split(g)
    d0, d1, d2 = prob.split(step.d)
    worst = 0.0
    if prob.n0:
        worst = -float(np.min(g0 * d0, initial=0.0))
    if prob.n1:
        worst = max(worst, -float(np.min(g1 * d1 + g2 * d2, initial=0.0)))
    return worst / r


def slpcc_solve(prob: MpccProblem, x_init: PartitionedPoint,
                cfg: Optional[SolverConfig] = None) -> SolveReport:
    """Run the trust-region method from a feasible starting point.

    Raises ValueError for an infeasible start (callers may project first)
    and ConfigError when the variant needs a missing Hessian oracle.
    """
    cfg = cfg or SolverConfig()
    cfg.validate_against(prob)
    if not is_feasible(x_init, prob):
        raise ValueError("x_init is infeasible; apply project_feasible first")

    x = x_init
    xf = x.full()
    fx = _checked_value(prob, xf)
    delta_bar = cfg.delta_bar0
    delta_qp = cfg.delta_qp0 if cfg.delta_qp0 is not None else cfg.delta_bar0
    prev_accepted: Optional[float] = None

    iterates: list = []
    outer_accepted = 0
    total_inner = 0
    total_bqp = 0
    status = "iteration_limit"
    chi = float("nan")

    for k in range(cfg.max_outer + 1):
        g = _checked_grad(prob, xf)
        # Two certificates, either of which vanishes only at B-stationary
        # points: the unit-radius subproblem value, and the max-norm rate of
        # the per-coordinate subproblems at a small radius.  The local rate
        # still sees profitable branch switches closer than local_radius
        # (the degenerate-corner trap) but ignores distant switches whose
        # linear gain the curvature voids, which would jam the unit-radius
        # measure forever at legitimate local solutions.
        chi_unit = solve_lpcc(x, g, prob, 1.0).predicted_reduction
        chi = min(chi_unit, _local_rate(x, g, prob, cfg.local_radius))

        terminal = None
        if fx <= -cfg.unbounded_cutoff:
            terminal = "unbounded"
        elif chi == 0.0:
            terminal = "b_stationary"
        elif chi <= cfg.stationarity_tol:
            terminal = "tolerance_reached"
        elif k == cfg.max_outer:
            terminal = "iteration_limit"
        if terminal is not None:
            iterates.append(IterateRecord(k, fx, chi, None, STEP_NONE, 0, 0, x))
            status = terminal
            break

        delta = _reset_radius(cfg, prev_accepted, delta_bar)
        inner_count = 0
        accepted = False
        step_type = STEP_LPCC
        trial_point = None
        f_trial = None
        rho = 0.0
        for _ in range(cfg.max_inner_halvings + 1):
            inner_count += 1
            step = solve_lpcc(x, g, prob, delta)
            if step.is_zero:
                terminal = "b_stationary"
                break
            d = step.d
            step_type = STEP_LPCC
            cached_point = None
            cached_f = None
            if cfg.variant == "cauchy":
                d, used, cached_point, cached_f = _cauchy_candidate(
                    x, step, prob, delta, cfg.sigma)
                if used:
                    step_type = STEP_CAUCHY
            if cached_point is not None:
                trial_point, f_trial = cached_point, cached_f
            else:
                trial_point = make_point(xf + d, prob)
                f_trial = _checked_value(prob, trial_point.full())
            rho = accept_ratio(fx, f_trial, step.predicted_reduction)
            if rho >= cfg.sigma:
                accepted = True
                break
            delta *= 0.5
        total_inner += inner_count

        if terminal is not None:
            iterates.append(IterateRecord(k, fx, chi, None, STEP_NONE, inner_count, 0, x))
            status = terminal
            break
        if not accepted:
            # The ratio test can jam once the remaining reductions drown in
            # floating-point cancellation against |f|, which starves the
            # second-order polish.  Before declaring a stall, try one BQP
            # step on the current iterate's own active sets; only a strict
            # improvement is taken.
            rescued = False
            if cfg.variant in ("plain", "cauchy"):
                res = bqp_step(x, x, prob, delta_qp, cfg.sigma, delta_bar)
                delta_qp = res.delta_qp
                total_bqp += res.iterations
                if res.point is not None and res.f_value < fx:
                    iterates.append(IterateRecord(k, fx, chi, None, STEP_BQP,
                                                  inner_count, res.iterations, x))
                    outer_accepted += 1
                    x, fx = res.point, res.f_value
                    xf = x.full()
                    rescued = True
            if not rescued:
                iterates.append(IterateRecord(k, fx, chi, None, STEP_NONE, inner_count, 0, x))
                status = "inner_loop_stall"
                break
            continue

        delta_bar = max(delta_bar, 2.0 * delta)
        prev_accepted = delta
        x_new, f_new = trial_point, f_trial

        bqp_count = 0
        if cfg.variant in ("plain", "cauchy"):
            res = bqp_step(x, x_new, prob, delta_qp, rho, delta_bar)
            delta_qp = res.delta_qp
            bqp_count = res.iterations
            if res.point is not None:
                x_new, f_new = res.point, res.f_value
                step_type = STEP_BQP
        total_bqp += bqp_count

        if not is_feasible(x_new, prob):
            raise RuntimeError("internal error: accepted iterate is infeasible")
        iterates.append(IterateRecord(k, fx, chi, delta, step_type, inner_count, bqp_count, x))
        outer_accepted += 1
        x, fx = x_new, f_new
        xf = x.full()

    return SolveReport(status=status, iterates=iterates,
                       outer_iters=outer_accepted, total_inner_iters=total_inner,
                       bqp_iters=total_bqp, final_point=x, final_f=fx,
                       final_chi=chi)
