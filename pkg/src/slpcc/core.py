"""Problem model, feasibility handling and active sets for bound-constrained
MPCCs.

The problem class treated here is

    minimize    f(x)
    subject to  l0 <= x0 <= u0,
                0 <= x1  complementary to  x2 >= 0,

where x = (x0, x1, x2) splits into n0 bound-constrained variables and n1
complementarity pairs.  Iterates are kept exactly feasible: active
complementarity coordinates hold exact floating-point zeros, never small
positive residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray

VARIANTS = ("first_order", "plain", "cauchy")
RESET_POLICIES = ("adaptive", "always_delta_bar", "always_delta_min")


class ConfigError(ValueError):
    """Solver configuration inconsistent with the problem (e.g. missing Hessian)."""


def _as_float_array(v, size: int, name: str) -> Vector:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size != size:
        raise ValueError(f"{name} has length {a.size}, expected {size}")
    return a


@dataclass(frozen=True)
class MpccProblem:
    """Bound-constrained MPCC with callable objective oracles.

    The oracles receive the full variable vector of length ``n0 + 2*n1``
    ordered as ``[x0, x1, x2]``.  ``hess`` is optional; solver variants that
    take second-order steps refuse to run without it.  All oracles must be
    pure functions so that independent solves can run concurrently.
    """

    n0: int
    n1: int
    l0: Vector
    u0: Vector
    f: Callable[[Vector], float]
    grad: Callable[[Vector], Vector]
    hess: Optional[Callable[[Vector], Vector]] = None
    name: str = ""

    def __post_init__(self):
        if self.n0 < 0 or self.n1 < 0 or self.n0 + self.n1 == 0:
            raise ValueError("need n0 >= 0, n1 >= 0 and at least one variable")
        l0 = _as_float_array(self.l0, self.n0, "l0")
        u0 = _as_float_array(self.u0, self.n0, "u0")
        if np.any(l0 >= u0):
            i = int(np.argmax(l0 >= u0))
            raise ValueError(f"bounds require l0 < u0, violated at index {i}")
        l0.setflags(write=False)
        u0.setflags(write=False)
        object.__setattr__(self, "l0", l0)
        object.__setattr__(self, "u0", u0)

    @property
    def n(self) -> int:
        return self.n0 + 2 * self.n1

    def split(self, x: Vector) -> tuple[Vector, Vector, Vector]:
        n0, n1 = self.n0, self.n1
        return x[:n0], x[n0:n0 + n1], x[n0 + n1:]


@dataclass(frozen=True)
class PartitionedPoint:
    """A point x = (x0, x1, x2); value object, arrays are frozen on construction."""

    x0: Vector
    x1: Vector
    x2: Vector

    def __post_init__(self):
        for name in ("x0", "x1", "x2"):
            a = np.array(getattr(self, name), dtype=float).reshape(-1)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def full(self) -> Vector:
        return np.concatenate((self.x0, self.x1, self.x2))

    @staticmethod
    def from_full(x: Vector, prob: MpccProblem) -> "PartitionedPoint":
        x0, x1, x2 = prob.split(np.asarray(x, dtype=float))
        return PartitionedPoint(x0, x1, x2)


def make_point(x_full: Vector, prob: MpccProblem) -> PartitionedPoint:
    """Build a point from a full trial vector, clamping x0 into its bounds.

    The clamp only absorbs 1-ulp overshoot from steps of the form
    ``x0 + (u0 - x0)``; complementarity coordinates are taken verbatim since
    the step construction keeps their zeros exact.
    """
    x0, x1, x2 = prob.split(np.asarray(x_full, dtype=float))
    return PartitionedPoint(np.clip(x0, prob.l0, prob.u0), x1, x2)


def is_feasible(p: PartitionedPoint, prob: MpccProblem) -> bool:
    """Exact feasibility test; complementarity products must vanish exactly."""
    if p.x0.size != prob.n0 or p.x1.size != prob.n1 or p.x2.size != prob.n1:
        raise ValueError("point dimensions do not match problem")
    if np.any(p.x0 < prob.l0) or np.any(p.x0 > prob.u0):
        return False
    if np.any(p.x1 < 0.0) or np.any(p.x2 < 0.0):
        return False
    return not np.any(p.x1 * p.x2 != 0.0)


def project_feasible(p: PartitionedPoint, prob: MpccProblem) -> PartitionedPoint:
    """Project an arbitrary point onto the feasible set.

    x0 is clamped into its box.  Each complementarity pair is first clipped
    to the nonnegative orthant and then snapped onto the nearer axis: the
    smaller coordinate is zeroed, with ties zeroing x1.  Both clips happen
    before the case split, so (-1, 3) projects to (0, 3) and (1, 1) to (0, 1).
    """
    if p.x0.size != prob.n0 or p.x1.size != prob.n1 or p.x2.size != prob.n1:
        raise ValueError("point dimensions do not match problem")
    x0 = np.clip(p.x0, prob.l0, prob.u0)
    x1 = np.maximum(p.x1, 0.0)
    x2 = np.maximum(p.x2, 0.0)
    drop1 = x1 <= x2
    x1 = np.where(drop1, 0.0, x1)
    x2 = np.where(drop1, x2, 0.0)
    return PartitionedPoint(x0, x1, x2)


@dataclass(frozen=True)
class ActiveSets:
    """Index sets of active constraints at a feasible point.

    ``a1``/``a2`` collect pairs whose first/second coordinate is exactly
    zero, ``degenerate`` their intersection (biactive pairs), and
    ``a1plus``/``a2plus`` the strictly complementary remainders.
    """

    a0l: frozenset
    a0u: frozenset
    a1: frozenset
    a2: frozenset
    a1plus: frozenset
    a2plus: frozenset
    degenerate: frozenset


def active_sets(p: PartitionedPoint, prob: MpccProblem, bound_tol: float = 1e-12) -> ActiveSets:
    """Classify active constraints.

    Complementarity activity is an exact-zero test (iterates carry exact
    zeros by construction); bound activity uses the absolute tolerance
    ``bound_tol`` because second-order steps may stop very near a bound.
    """
    a0l = frozenset(np.flatnonzero(np.abs(p.x0 - prob.l0) <= bound_tol).tolist())
    a0u = frozenset(np.flatnonzero(np.abs(p.x0 - prob.u0) <= bound_tol).tolist())
    a1 = frozenset(np.flatnonzero(p.x1 == 0.0).tolist())
    a2 = frozenset(np.flatnonzero(p.x2 == 0.0).tolist())
    degenerate = a1 & a2
    return ActiveSets(a0l, a0u, a1, a2, a1 - degenerate, a2 - degenerate, degenerate)


def stationarity_measure(p: PartitionedPoint, prob: MpccProblem) -> float:
    """First-order criticality chi(p) >= 0.

    Defined as the negative optimal value of the linearized subproblem with
    unit trust radius; it vanishes exactly at points admitting no feasible
    first-order descent within that radius.  Note that a local solution may
    carry chi > 0 when a profitable-looking branch switch lies within unit
    distance; projected_residual is the purely local certificate.
    """
    from .lpcc import solve_lpcc

    step = solve_lpcc(p, prob.grad(p.full()), prob, 1.0)
    return step.predicted_reduction


def projected_residual(p: PartitionedPoint, prob: MpccProblem,
                       bound_tol: float = 1e-12) -> float:
    """Max-norm residual of the gradient projected to bounds and
    complementarity.

    Zero exactly at B-stationary points: free coordinates need a vanishing
    gradient, coordinates at a bound or on the zero side of a biactive pair
    only a correctly signed one.  The nonzero side of a strictly
    complementary pair is locally a free variable; the inactive partner
    carries no condition because switching branches is not a local move.
    """
    g0, g1, g2 = prob.split(prob.grad(p.full()))
    res = 0.0
    if prob.n0:
        at_lo = p.x0 - prob.l0 <= bound_tol
        at_hi = prob.u0 - p.x0 <= bound_tol
        free = ~at_lo & ~at_hi
        parts = np.concatenate([
            np.abs(g0[free]),
            np.maximum(-g0[at_lo], 0.0),
            np.maximum(g0[at_hi], 0.0),
        ])
        if parts.size:
            res = float(parts.max())
    if prob.n1:
        first_zero = p.x1 == 0.0
        second_zero = p.x2 == 0.0
        bi = first_zero & second_zero
        parts = np.concatenate([
            np.abs(g1[~first_zero]),
            np.abs(g2[~second_zero]),
            np.maximum(-g1[bi], 0.0),
            np.maximum(-g2[bi], 0.0),
        ])
        if parts.size:
            res = max(res, float(parts.max()))
    return res


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the trust-region driver.

    ``variant`` selects the step machinery: ``first_order`` uses pure LPCC
    steps, ``plain`` adds second-order BQP steps, ``cauchy`` additionally
    runs the piecewise Cauchy search before the acceptance test.  The inner
    radius is reset each outer iteration according to ``reset_policy``:
    ``adaptive`` doubles the previously accepted radius (clamped to
    [delta_min, delta_bar]), the other two policies pin it to one end.
    """

    sigma: float = 0.05
    delta_min: float = 1.0
    delta_bar0: float = 32.0
    variant: str = "plain"
    reset_policy: str = "adaptive"
    delta_init: Optional[float] = None
    delta_qp0: Optional[float] = None
    max_inner_halvings: int = 50
    stationarity_tol: float = 1e-7
    unbounded_cutoff: float = 1e12
    max_outer: int = 10000
    bound_tol: float = 1e-12
    local_radius: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ConfigError("sigma must lie in (0, 1)")
        # Equality is allowed: the reference runs of the quadratic example
        # start with a single-point reset interval that widens on acceptance.
        if not 0.0 < self.delta_min <= self.delta_bar0:
            raise ConfigError("need 0 < delta_min <= delta_bar0")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.reset_policy not in RESET_POLICIES:
            raise ConfigError(f"reset_policy must be one of {RESET_POLICIES}")
        if self.delta_init is not None and not self.delta_min <= self.delta_init <= self.delta_bar0:
            raise ConfigError("delta_init must lie in [delta_min, delta_bar0]")

    def validate_against(self, prob: MpccProblem) -> None:
        if self.variant in ("plain", "cauchy") and prob.hess is None:
            raise ConfigError(
                f"variant {self.variant!r} needs a Hessian oracle, problem has none"
            )
