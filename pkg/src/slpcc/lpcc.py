"""Closed-form solver for the linearized trust-region subproblem.

For a feasible point x and radius delta > 0 the subproblem

    minimize    grad^T d
    subject to  l0 <= x0 + d0 <= u0,
                0 <= x1 + d1  complementary to  x2 + d2 >= 0,
                ||d||_inf <= delta

decomposes coordinate-wise: each bound variable is a one-dimensional LP with
an obvious endpoint solution, and each complementarity pair reduces to
evaluating the linear objective on at most four candidate moves, determined
by which of four geometric cases the pair falls into.  Total cost is
O(n0 + n1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import MpccProblem, PartitionedPoint, Vector


class ComplCase(enum.Enum):
    """Position of a feasible pair (x1, x2) relative to the trust box.

    A: x2 = 0 and x1 within reach of the kink (biactive pairs included);
    B: x1 = 0 and 0 < x2 <= delta;  C: x1 > delta;  D: x2 > delta.
    """

    A = "A"
    B = "B"
    C = "C"
    D = "D"


@dataclass(frozen=True)
class LpccStep:
    """Solution of the linearized subproblem.

    ``predicted_reduction`` is the negative optimal objective value, hence
    always >= 0; ``is_zero`` certifies that no feasible descent exists within
    the trust radius.
    """

    d: Vector
    predicted_reduction: float
    is_zero: bool


def classify_case(x1i: float, x2i: float, delta: float) -> ComplCase:
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if x1i < 0.0 or x2i < 0.0 or x1i * x2i != 0.0:
        raise ValueError(f"infeasible complementarity pair ({x1i}, {x2i})")
    if x2i == 0.0:
        if x1i <= delta:
            return ComplCase.A
        return ComplCase.C
    if x2i <= delta:
        return ComplCase.B
    return ComplCase.D


def candidate_set(x1i: float, x2i: float, delta: float, case: ComplCase) -> list[tuple[float, float]]:
    """Candidate moves (d1, d2) for one pair; order fixes the tie-break."""
    if case is ComplCase.A:
        return [(0.0, 0.0), (delta, 0.0), (-x1i, 0.0), (-x1i, delta)]
    if case is ComplCase.B:
        return [(0.0, 0.0), (delta, -x2i), (0.0, -x2i), (0.0, delta)]
    if case is ComplCase.C:
        return [(0.0, 0.0), (-delta, 0.0), (delta, 0.0)]
    return [(0.0, 0.0), (0.0, -delta), (0.0, delta)]


def _solve_bound_part(x0: Vector, g0: Vector, l0: Vector, u0: Vector, delta: float) -> Vector:
    up = np.minimum(u0 - x0, delta)
    down = np.maximum(l0 - x0, -delta)
    return np.where(g0 < 0.0, up, np.where(g0 > 0.0, down, 0.0))


def _solve_pair_part(x1, x2, g1, g2, delta):
    """Vectorized candidate evaluation over all pairs.

    Candidates are laid out rows-first in the per-case order of
    ``candidate_set``; ``argmin`` picks the first row attaining the minimum,
    which realizes both tie-break rules (the zero move is row 0 everywhere).
    """
    n1 = x1.size
    d1 = np.zeros(n1)
    d2 = np.zeros(n1)
    if n1 == 0:
        return d1, d2

    case_a = x2 == 0.0
    near = x1 <= delta
    a = case_a & near
    c = case_a & ~near
    b = ~case_a & (x2 <= delta)
    dd = ~case_a & (x2 > delta)

    def pick(mask, cand1, cand2):
        if not np.any(mask):
            return
        vals = g1[mask] * cand1 + g2[mask] * cand2
        best = np.argmin(vals, axis=0)
        cols = np.arange(cand1.shape[1])
        d1[mask] = cand1[best, cols]
        d2[mask] = cand2[best, cols]

    zeros = np.zeros
    if np.any(a):
        m = int(np.count_nonzero(a))
        x1a = x1[a]
        pick(a,
             np.stack([zeros(m), np.full(m, delta), -x1a, -x1a]),
             np.stack([zeros(m), zeros(m), zeros(m), np.full(m, delta)]))
    if np.any(b):
        m = int(np.count_nonzero(b))
        x2b = x2[b]
        pick(b,
             np.stack([zeros(m), np.full(m, delta), zeros(m), zeros(m)]),
             np.stack([zeros(m), -x2b, -x2b, np.full(m, delta)]))
    if np.any(c):
        m = int(np.count_nonzero(c))
        pick(c,
             np.stack([zeros(m), np.full(m, -delta), np.full(m, delta)]),
             np.stack([zeros(m), zeros(m), zeros(m)]))
    if np.any(dd):
        m = int(np.count_nonzero(dd))
        pick(dd,
             np.stack([zeros(m), zeros(m), zeros(m)]),
             np.stack([zeros(m), np.full(m, -delta), np.full(m, delta)]))
    return d1, d2


def _solve_small(p, g0, g1, g2, l0, u0, delta, n0, n1):
    """Scalar path for tiny instances; numpy call overhead dominates there.

    Produces bit-identical output to the vectorized path: same candidate
    order, ties resolved to the first minimizer.
    """
    d = np.zeros(n0 + 2 * n1)
    value = 0.0
    for i in range(n0):
        gi = g0[i]
        if gi < 0.0:
            di = min(u0[i] - p.x0[i], delta)
        elif gi > 0.0:
            di = max(l0[i] - p.x0[i], -delta)
        else:
            continue
        d[i] = di
        value += gi * di
    for i in range(n1):
        x1i, x2i = p.x1[i], p.x2[i]
        g1i, g2i = g1[i], g2[i]
        if x2i == 0.0:
            if x1i <= delta:
                cands = ((0.0, 0.0), (delta, 0.0), (-x1i, 0.0), (-x1i, delta))
            else:
                cands = ((0.0, 0.0), (-delta, 0.0), (delta, 0.0))
        elif x2i <= delta:
            cands = ((0.0, 0.0), (delta, -x2i), (0.0, -x2i), (0.0, delta))
        else:
            cands = ((0.0, 0.0), (0.0, -delta), (0.0, delta))
        best = 0.0
        b1 = b2 = 0.0
        for c1, c2 in cands:
            v = g1i * c1 + g2i * c2
            if v < best:
                best, b1, b2 = v, c1, c2
        d[n0 + i] = b1
        d[n0 + n1 + i] = b2
        value += best
    return d, value


def solve_lpcc(p: PartitionedPoint, grad: Vector, prob: MpccProblem, delta: float) -> LpccStep:
    """Exact global minimizer of the linearized subproblem at radius delta."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    grad = np.asarray(grad, dtype=float)
    if grad.size != prob.n:
        raise ValueError(f"gradient has length {grad.size}, expected {prob.n}")
    if not np.all(np.isfinite(grad)):
        raise ValueError("gradient contains non-finite entries")

    g0, g1, g2 = prob.split(grad)
    if prob.n <= 16:
        d, value = _solve_small(p, g0, g1, g2, prob.l0, prob.u0, delta,
                                prob.n0, prob.n1)
    else:
        d0 = _solve_bound_part(p.x0, g0, prob.l0, prob.u0, delta)
        d1, d2 = _solve_pair_part(p.x1, p.x2, g1, g2, delta)
        d = np.concatenate((d0, d1, d2))
        # Every selected per-coordinate contribution is <= 0, so the sum is
        # free of cancellation and vanishes exactly iff d = 0.
        value = float(g0 @ d0 + g1 @ d1 + g2 @ d2)
    pred = 0.0 if value >= 0.0 else -value
    return LpccStep(d=d, predicted_reduction=pred, is_zero=(pred == 0.0))
