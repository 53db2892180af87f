"""Piecewise-linear Cauchy search used to improve first-order steps.

The path starts at the current iterate and follows the fixed direction
-grad f, respecting the variable bounds, the trust box of radius delta and
the complementarity structure: within each pair only the currently nonzero
coordinate moves, and when it reaches the kink at zero it is fixed there
while the partner coordinate is released if the search direction would
increase it.  A quadratic model is then minimized along the path and the
resulting point replaces the first-order step whenever it passes the same
acceptance test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MpccProblem, PartitionedPoint, Vector, make_point
from .lpcc import LpccStep


@dataclass(frozen=True)
class PiecewisePath:
    """Continuous path s : [0, 1] -> R^n with s(0) = 0.

    Each coordinate moves at most twice: once from the start and, for a
    complementarity partner released at a kink, once from its release time.
    ``start``/``stop`` hold those times in physical units, ``velocity`` the
    rate while moving, and ``stop_value`` the exact final offset (bound gaps
    and kink distances are stored verbatim so the path lands on exact zeros
    and exact bounds).
    """

    start: Vector
    stop: Vector
    velocity: Vector
    stop_value: Vector
    total_time: float

    @property
    def breakpoints(self) -> Vector:
        """Ascending parameter values in [0, 1] where the velocity changes."""
        if self.total_time == 0.0:
            return np.array([0.0])
        moving = self.velocity != 0.0
        times = np.concatenate((self.start[moving], self.stop[moving],
                                [0.0, self.total_time]))
        times = np.unique(np.clip(times, 0.0, self.total_time))
        return times / self.total_time

    def value(self, t: float) -> Vector:
        """Evaluate s(t) for t in [0, 1]."""
        tau = np.clip(t, 0.0, 1.0) * self.total_time
        span = np.clip(tau - self.start, 0.0, self.stop - self.start)
        s = self.velocity * span
        return np.where(tau >= self.stop, self.stop_value, s)

    def segment_velocity(self, t_mid: float) -> Vector:
        """Velocity vector (in t units) on the segment containing t_mid."""
        tau = t_mid * self.total_time
        active = (self.start <= tau) & (tau < self.stop)
        return self.velocity * active * self.total_time


def build_path(p: PartitionedPoint, grad: Vector, prob: MpccProblem, delta: float) -> PiecewisePath:
    """Construct the projected steepest-descent path from p."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    grad = np.asarray(grad, dtype=float)
    w = -grad
    n0, n1 = prob.n0, prob.n1
    n = prob.n

    start = np.zeros(n)
    stop = np.zeros(n)
    vel = np.zeros(n)
    stop_val = np.zeros(n)

    w0, w1, w2 = prob.split(w)

    # Bound-constrained block: run to the nearer of bound and trust box.
    for j in range(n0):
        v = w0[j]
        if v > 0.0:
            dist = min(prob.u0[j] - p.x0[j], delta)
        elif v < 0.0:
            dist = min(p.x0[j] - prob.l0[j], delta)
        else:
            continue
        if dist <= 0.0:
            continue
        vel[j] = v
        stop[j] = dist / abs(v)
        stop_val[j] = dist if v > 0.0 else -dist

    for i in range(n1):
        j1 = n0 + i
        j2 = n0 + n1 + i
        x1i, x2i = p.x1[i], p.x2[i]
        if x1i == 0.0 and x2i == 0.0:
            # Biactive: only upward moves are feasible; greedy choice with
            # lexicographic tie-break (x1 wins).
            if w1[i] <= 0.0 and w2[i] <= 0.0:
                continue
            if w1[i] >= w2[i]:
                mover, vm = j1, w1[i]
            else:
                mover, vm = j2, w2[i]
            vel[mover] = vm
            stop[mover] = delta / vm
            stop_val[mover] = delta
            continue

        if x1i > 0.0:
            mover, partner = j1, j2
            xm, vm, vp = x1i, w1[i], w2[i]
        else:
            mover, partner = j2, j1
            xm, vm, vp = x2i, w2[i], w1[i]
        if vm == 0.0:
            continue
        vel[mover] = vm
        if vm > 0.0:
            stop[mover] = delta / vm
            stop_val[mover] = delta
        elif xm > delta:
            stop[mover] = delta / -vm
            stop_val[mover] = -delta
        else:
            # Kink reached inside the trust box: fix the mover at zero and
            # pivot to the partner when the direction would increase it.
            t_kink = xm / -vm
            stop[mover] = t_kink
            stop_val[mover] = -xm
            if vp > 0.0:
                vel[partner] = vp
                start[partner] = t_kink
                stop[partner] = t_kink + delta / vp
                stop_val[partner] = delta

    moving = vel != 0.0
    total = float(stop[moving].max()) if np.any(moving) else 0.0
    return PiecewisePath(start=start, stop=stop, velocity=vel,
                         stop_value=stop_val, total_time=total)


def _first_local_minimizer(path: PiecewisePath, grad: Vector, hess: Vector) -> float:
    """First local minimizer of the quadratic model along the path.

    Scans segments in order; stops at the first interior stationary point
    with positive curvature, or at the first breakpoint where the one-sided
    slope turns positive, otherwise returns t = 1.
    """
    bps = path.breakpoints
    if bps.size < 2:
        return 0.0
    for a, b in zip(bps[:-1], bps[1:]):
        seg_len = b - a
        v = path.segment_velocity(0.5 * (a + b))
        s_a = path.value(a)
        hv = hess @ v
        slope = float(grad @ v + s_a @ hv)
        curv = float(v @ hv)
        if slope > 0.0 or (slope == 0.0 and curv > 0.0):
            return float(a)
        if slope < 0.0 and curv > 0.0:
            t_step = -slope / curv
            if t_step < seg_len:
                return float(a + t_step)
    return 1.0


def _cauchy_candidate(p: PartitionedPoint, d_lpcc: LpccStep, prob: MpccProblem,
                      delta: float, sigma: float):
    """Return (step, used_cauchy, trial_point, f_trial) with f_trial for the
    chosen step when it was evaluated, else None."""
    if prob.hess is None:
        raise ValueError("Cauchy search needs a Hessian oracle")
    xf = p.full()
    grad = np.asarray(prob.grad(xf), dtype=float)
    path = build_path(p, grad, prob, delta)
    if path.total_time == 0.0:
        return d_lpcc.d, False, None, None
    t_star = _first_local_minimizer(path, grad,
                                    np.asarray(prob.hess(xf), dtype=float))
    if t_star <= 0.0:
        return d_lpcc.d, False, None, None
    s_star = path.value(t_star)
    trial = make_point(xf + s_star, prob)
    f_trial = prob.f(trial.full())
    rho = (prob.f(xf) - f_trial) / d_lpcc.predicted_reduction
    if rho >= sigma:
        return trial.full() - xf, True, trial, f_trial
    return d_lpcc.d, False, None, None


def find_cauchy_point(p: PartitionedPoint, d_lpcc: LpccStep, prob: MpccProblem,
                      delta: float, sigma: float) -> Vector:
    """Improve the first-order step along the projected-gradient path.

    Returns the path minimizer s(t*) when its actual reduction passes the
    acceptance test measured against the first-order predicted reduction,
    otherwise returns the unmodified first-order step.
    """
    step, _, _, _ = _cauchy_candidate(p, d_lpcc, prob, delta, sigma)
    return step
