"""Second-order acceleration via bound-constrained quadratic programming.

After an accepted first-order step, the active sets at the step target fix
one coordinate of every complementarity pair to zero, which turns the
quadratic model around the current iterate into a box-constrained QP.  Any
point feasible for that box is feasible for the original problem, so the QP
solution can safely replace the first-order target.  The QP is solved
in-house by gradient projection with conjugate-gradient refinement on the
free variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import MpccProblem, PartitionedPoint, Vector, make_point

_CG_EPS = 1e-14


@dataclass(frozen=True)
class BqpSubproblem:
    """Quadratic model min g^T d + 0.5 d^T H d over a per-coordinate box.

    Coordinates with ``lower == upper`` are fixed (they carry the pair
    coordinates pinned to zero); for those the equality wins over the trust
    box so the subproblem never becomes infeasible.
    """

    hess: Vector
    grad: Vector
    lower: Vector
    upper: Vector
    d1: frozenset
    d2: frozenset
    delta_qp: float


@dataclass(frozen=True)
class BqpResult:
    point: Optional[PartitionedPoint]
    f_value: Optional[float]
    delta_qp: float
    iterations: int
    rho_qp: float


def partition_biactive(p_next: PartitionedPoint, grad_next: Vector) -> tuple[frozenset, frozenset]:
    """Split the biactive pairs of p_next greedily by gradient size.

    Pairs whose first-coordinate gradient dominates (ties included) go to
    the first set; in the QP those pairs keep their second coordinate fixed
    at zero.
    """
    n1 = p_next.x1.size
    g1 = grad_next[-2 * n1:-n1] if n1 else np.zeros(0)
    g2 = grad_next[-n1:] if n1 else np.zeros(0)
    bi = (p_next.x1 == 0.0) & (p_next.x2 == 0.0)
    first = bi & (g1 >= g2)
    d1 = frozenset(np.flatnonzero(first).tolist())
    d2 = frozenset(np.flatnonzero(bi & ~first).tolist())
    return d1, d2


def build_bqp(x: PartitionedPoint, target: PartitionedPoint, prob: MpccProblem,
              grad_x: Vector, hess_x: Vector, grad_target: Vector,
              delta_qp: float) -> BqpSubproblem:
    """Assemble the QP around x using the active sets predicted at target."""
    n0, n1 = prob.n0, prob.n1
    d1, d2 = partition_biactive(target, grad_target)

    lower = np.empty(prob.n)
    upper = np.empty(prob.n)
    lower[:n0] = np.maximum(prob.l0 - x.x0, -delta_qp)
    upper[:n0] = np.minimum(prob.u0 - x.x0, delta_qp)

    a1t = target.x1 == 0.0
    in_d1 = np.zeros(n1, dtype=bool)
    if d1:
        in_d1[list(d1)] = True
    fix_first = a1t & ~in_d1
    lo1 = np.where(fix_first, -x.x1, np.maximum(-x.x1, -delta_qp))
    hi1 = np.where(fix_first, -x.x1, delta_qp)
    lo2 = np.where(fix_first, np.maximum(-x.x2, -delta_qp), -x.x2)
    hi2 = np.where(fix_first, delta_qp, -x.x2)
    lower[n0:n0 + n1] = lo1
    upper[n0:n0 + n1] = hi1
    lower[n0 + n1:] = lo2
    upper[n0 + n1:] = hi2
    return BqpSubproblem(hess=hess_x, grad=grad_x, lower=lower, upper=upper,
                         d1=d1, d2=d2, delta_qp=delta_qp)


def _kkt_violation(d: Vector, r: Vector, lo: Vector, hi: Vector) -> float:
    fixed = lo == hi
    at_lo = (d == lo) & ~fixed
    at_hi = (d == hi) & ~fixed
    free = ~fixed & ~at_lo & ~at_hi
    v = 0.0
    if np.any(free):
        v = float(np.max(np.abs(r[free])))
    if np.any(at_lo):
        v = max(v, float(np.max(np.maximum(-r[at_lo], 0.0))))
    if np.any(at_hi):
        v = max(v, float(np.max(np.maximum(r[at_hi], 0.0))))
    return v


def _projected_cauchy(H: Vector, g: Vector, d: Vector, r: Vector,
                      lo: Vector, hi: Vector) -> Vector:
    """First local minimizer of the model along the projected path of -r."""
    p = -r
    blocked = ((d >= hi) & (p > 0.0)) | ((d <= lo) & (p < 0.0)) | (lo == hi)
    v = np.where(blocked, 0.0, p)
    if not np.any(v):
        return d
    dist = np.where(v > 0.0, hi - d, np.where(v < 0.0, d - lo, np.inf))
    with np.errstate(divide="ignore", invalid="ignore"):
        stop = np.where(v != 0.0, dist / np.abs(v), np.inf)
    times = np.unique(stop[np.isfinite(stop)])
    times = times[times > 0.0]

    t_prev = 0.0
    s = np.zeros_like(d)
    for t_next in times:
        active = (stop > t_prev)
        vseg = v * active
        hv = H @ vseg
        slope = float(g @ vseg + (d + s) @ hv)
        curv = float(vseg @ hv)
        if slope > 0.0 or (slope == 0.0 and curv > 0.0):
            break
        seg_len = t_next - t_prev
        if slope < 0.0 and curv > 0.0:
            t_step = -slope / curv
            if t_step < seg_len:
                s = s + vseg * t_step
                break
        s = s + vseg * seg_len
        t_prev = t_next
    out = np.clip(d + s, lo, hi)
    # Snap coordinates that stopped at their bound to the exact bound value.
    out = np.where(stop <= t_prev, np.where(v > 0.0, hi, np.where(v < 0.0, lo, out)), out)
    return np.clip(out, lo, hi)


def _subspace_cg(H: Vector, g: Vector, d: Vector, lo: Vector, hi: Vector,
                 tol: float, max_iters: int) -> tuple[Vector, int]:
    """Truncated CG on the variables strictly inside the box."""
    free = (d > lo) & (d < hi)
    if not np.any(free):
        return d, 0
    r = g + H @ d
    rf_norm = float(np.max(np.abs(r[free])))
    if rf_norm <= tol:
        return d, 0
    rs = float(r[free] @ r[free])
    p = np.where(free, -r, 0.0)
    y = d.copy()
    iters = 0
    for _ in range(max_iters):
        hp = H @ p
        php = float(p @ hp)
        pp = float(p @ p)
        if pp == 0.0:
            break
        iters += 1
        # Largest feasible step along p inside the box.
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(p > 0.0, (hi - y) / p, np.where(p < 0.0, (lo - y) / p, np.inf))
        alpha_box = float(np.min(ratios))
        if php <= _CG_EPS * pp:
            # Nonpositive curvature: run to the boundary if that descends.
            if alpha_box > 0.0 and math.isfinite(alpha_box) and float(r @ p) < 0.0:
                y = y + alpha_box * p
                snap = ratios == alpha_box
                y[snap & (p > 0.0)] = hi[snap & (p > 0.0)]
                y[snap & (p < 0.0)] = lo[snap & (p < 0.0)]
            break
        alpha = rs / php
        if alpha >= alpha_box:
            y = y + alpha_box * p
            snap = ratios == alpha_box
            y[snap & (p > 0.0)] = hi[snap & (p > 0.0)]
            y[snap & (p < 0.0)] = lo[snap & (p < 0.0)]
            break
        y = y + alpha * p
        r = r + alpha * hp
        rs_new = float(r[free] @ r[free])
        if math.sqrt(rs_new) <= tol:
            break
        p = np.where(free, -r, 0.0) + (rs_new / rs) * p
        rs = rs_new
    return np.clip(y, lo, hi), iters


def solve_bqp_inner(sub: BqpSubproblem, tol: float = 1e-10,
                    max_iters: Optional[int] = None) -> tuple[Vector, int]:
    """Solve the box QP; returns (d, iteration count).

    Alternates projected-gradient Cauchy steps with subspace CG until the
    projected model gradient drops below tol or the iteration budget
    (100 n by default) is exhausted.  Indefinite models are handled by
    truncating CG at negative curvature or at the box boundary.
    """
    H, g = sub.hess, sub.grad
    lo, hi = sub.lower, sub.upper
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(g))):
        raise ValueError("non-finite model data in QP subproblem")
    n = g.size
    budget = 100 * n if max_iters is None else max_iters
    d = np.clip(np.zeros(n), lo, hi)
    used = 0
    q_prev = float(g @ d + 0.5 * d @ (H @ d))
    while used < budget:
        r = g + H @ d
        if _kkt_violation(d, r, lo, hi) <= tol:
            break
        used += 1
        d_new = _projected_cauchy(H, g, d, r, lo, hi)
        cg_tol = max(0.05 * tol, 1e-15 * (1.0 + float(np.max(np.abs(g)))))
        d_new, cg_iters = _subspace_cg(H, g, d_new, lo, hi, cg_tol,
                                       max_iters=budget - used)
        used += cg_iters
        q_new = float(g @ d_new + 0.5 * d_new @ (H @ d_new))
        if q_new >= q_prev - abs(q_prev) * 1e-15:
            d = d_new if q_new < q_prev else d
            break
        d, q_prev = d_new, q_new
    return d, used


def bqp_step(x: PartitionedPoint, accepted_step_target: PartitionedPoint,
             prob: MpccProblem, delta_qp: float, rho_ll: float,
             delta_bar: float) -> BqpResult:
    """One second-order improvement attempt per accepted outer step.

    Builds the QP around x on the active sets of the accepted target,
    updates the QP trust radius from the achieved-to-predicted ratio and
    accepts the QP point when that ratio reaches half the first-order
    acceptance ratio.  On rejection the caller keeps the first-order target.
    """
    if prob.hess is None:
        raise ValueError("BQP step needs a Hessian oracle")
    xf = x.full()
    grad_x = prob.grad(xf)
    hess_x = np.asarray(prob.hess(xf), dtype=float)
    grad_target = prob.grad(accepted_step_target.full())
    sub = build_bqp(x, accepted_step_target, prob, grad_x, hess_x,
                    grad_target, delta_qp)
    d, iters = solve_bqp_inner(sub)
    model_red = -float(grad_x @ d + 0.5 * d @ (hess_x @ d))
    if model_red <= 0.0:
        return BqpResult(point=None, f_value=None, delta_qp=delta_qp / 4.0,
                         iterations=iters, rho_qp=-math.inf)
    f_base = prob.f(xf)
    trial = make_point(xf + d, prob)
    f_trial = prob.f(trial.full())
    rho_qp = (f_base - f_trial) / model_red
    if rho_qp >= 0.75:
        new_delta = min(delta_bar, 2.0 * delta_qp)
    elif rho_qp >= 0.25:
        new_delta = delta_qp
    else:
        new_delta = delta_qp / 4.0
    if rho_qp >= 0.5 * rho_ll:
        return BqpResult(point=trial, f_value=f_trial, delta_qp=new_delta,
                         iterations=iters, rho_qp=rho_qp)
    return BqpResult(point=None, f_value=None, delta_qp=new_delta,
                     iterations=iters, rho_qp=rho_qp)
