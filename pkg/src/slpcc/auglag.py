"""Augmented-Lagrangian outer method for general complementarity programs.

Problems of the form

    minimize    f(x)
    subject to  c(x) = 0,
                0 <= g(x)  complementary to  h(x) >= 0,
                lx <= x <= ux (optional)

are handled by introducing slacks s_g = g(x), s_h = h(x) and minimizing the
augmented Lagrangian over (x, s_g, s_h) subject only to bounds and the slack
complementarity, which is exactly the bound-constrained MPCC the trust-region
solver handles.  Multipliers are updated first-order when the constraint
violation shrinks fast enough, otherwise the penalty grows tenfold.  All
subproblem iterates satisfy the complementarity constraints exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import (MpccProblem, PartitionedPoint, SolverConfig, Vector,
                   project_feasible)
from .driver import slpcc_solve

BOUND_FOLD = 1e10


@dataclass(frozen=True)
class GeneralMpcc:
    """Smooth general MPCC with oracle callables.

    ``linear_constraints`` asserts that c, g and h are affine, in which case
    the subproblem Hessian assembled from ``hess_f`` and the penalty terms is
    exact; otherwise it is a Gauss-Newton approximation.
    """

    n: int
    m: int
    p: int
    f: Callable[[Vector], float]
    grad_f: Callable[[Vector], Vector]
    g: Callable[[Vector], Vector]
    jac_g: Callable[[Vector], Vector]
    h: Callable[[Vector], Vector]
    jac_h: Callable[[Vector], Vector]
    c: Optional[Callable[[Vector], Vector]] = None
    jac_c: Optional[Callable[[Vector], Vector]] = None
    hess_f: Optional[Callable[[Vector], Vector]] = None
    lx: Optional[Vector] = None
    ux: Optional[Vector] = None
    linear_constraints: bool = False
    name: str = ""

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("need at least one complementarity pair")
        if self.m > 0 and (self.c is None or self.jac_c is None):
            raise ValueError("m > 0 requires c and jac_c oracles")

    def eval_c(self, x: Vector) -> Vector:
        return np.asarray(self.c(x), float) if self.m else np.zeros(0)

    def eval_jac_c(self, x: Vector) -> Vector:
        return np.asarray(self.jac_c(x), float) if self.m else np.zeros((0, self.n))


@dataclass
class AuglagState:
    """Multipliers, penalty and tolerances of the outer loop."""

    y: Vector
    z_g: Vector
    z_h: Vector
    rho: float
    omega: float
    eta: float


@dataclass(frozen=True)
class AuglagConfig:
    rho0: float = 1.0
    omega0: float = 1e-2
    eta0: float = 1e-1
    omega_min: float = 1e-9
    tol_feasibility: float = 1e-8
    tol_stationarity: float = 1e-8
    penalty_factor: float = 10.0
    penalty_max: float = 1e12
    max_outer: int = 50
    subproblem: SolverConfig = field(default_factory=lambda: SolverConfig(
        variant="plain", max_outer=2000))


@dataclass(frozen=True)
class AuglagRecord:
    iteration: int
    violation: float
    stationarity: float
    rho: float
    subproblem_status: str


@dataclass(frozen=True)
class AuglagReport:
    status: str  # converged | penalty_overflow | iteration_limit
    records: list
    x: Vector
    s_g: Vector
    s_h: Vector
    multipliers_y: Vector
    multipliers_g: Vector
    multipliers_h: Vector
    rho: float
    subproblem_reports: list

    @property
    def final_point(self) -> Vector:
        return np.concatenate([self.x, self.s_g, self.s_h])


def _fold_bounds(gp: GeneralMpcc):
    lx = np.full(gp.n, -BOUND_FOLD) if gp.lx is None else np.asarray(gp.lx, float)
    ux = np.full(gp.n, BOUND_FOLD) if gp.ux is None else np.asarray(gp.ux, float)
    return np.where(np.isfinite(lx), lx, -BOUND_FOLD), np.where(np.isfinite(ux), ux, BOUND_FOLD)


def build_subproblem(gp: GeneralMpcc, st: AuglagState) -> MpccProblem:
    """Bound-constrained MPCC minimizing the augmented Lagrangian.

    Variables are stacked as x0 := x (bounds folded to +-1e10 when absent),
    x1 := s_g and x2 := s_h; the objective is

        f - y^T c - z_g^T (s_g - g) - z_h^T (s_h - h)
          + rho/2 (||c||^2 + ||s_g - g||^2 + ||s_h - h||^2).
    """
    n, p = gp.n, gp.p
    y = np.asarray(st.y, float)
    z_g = np.asarray(st.z_g, float)
    z_h = np.asarray(st.z_h, float)
    rho = float(st.rho)
    l0, u0 = _fold_bounds(gp)

    def split(v):
        return v[:n], v[n:n + p], v[n + p:]

    def value(v):
        x, sg, sh = split(v)
        cv = gp.eval_c(x)
        rg = sg - np.asarray(gp.g(x), float)
        rh = sh - np.asarray(gp.h(x), float)
        return float(gp.f(x) - y @ cv - z_g @ rg - z_h @ rh
                     + 0.5 * rho * (cv @ cv + rg @ rg + rh @ rh))

    def gradient(v):
        x, sg, sh = split(v)
        cv = gp.eval_c(x)
        Jc = gp.eval_jac_c(x)
        Jg = np.asarray(gp.jac_g(x), float)
        Jh = np.asarray(gp.jac_h(x), float)
        rg = sg - np.asarray(gp.g(x), float)
        rh = sh - np.asarray(gp.h(x), float)
        gx = (np.asarray(gp.grad_f(x), float) - Jc.T @ y + Jg.T @ z_g + Jh.T @ z_h
              + rho * (Jc.T @ cv - Jg.T @ rg - Jh.T @ rh))
        gsg = -z_g + rho * rg
        gsh = -z_h + rho * rh
        return np.concatenate([gx, gsg, gsh])

    hessian = None
    if gp.hess_f is not None:
        def hessian(v):
            x, _, _ = split(v)
            Jc = gp.eval_jac_c(x)
            Jg = np.asarray(gp.jac_g(x), float)
            Jh = np.asarray(gp.jac_h(x), float)
            H = np.zeros((n + 2 * p, n + 2 * p))
            # Constraint curvature terms are dropped; exact when the
            # constraints are affine, Gauss-Newton otherwise.
            H[:n, :n] = (np.asarray(gp.hess_f(x), float)
                         + rho * (Jc.T @ Jc + Jg.T @ Jg + Jh.T @ Jh))
            H[:n, n:n + p] = -rho * Jg.T
            H[n:n + p, :n] = -rho * Jg
            H[:n, n + p:] = -rho * Jh.T
            H[n + p:, :n] = -rho * Jh
            H[n:n + p, n:n + p] = rho * np.eye(p)
            H[n + p:, n + p:] = rho * np.eye(p)
            return H

    return MpccProblem(n0=n, n1=p, l0=l0, u0=u0, f=value, grad=gradient,
                       hess=hessian, name=f"auglag({gp.name})")


def _violation(gp: GeneralMpcc, x, sg, sh) -> float:
    cv = gp.eval_c(x)
    rg = sg - np.asarray(gp.g(x), float)
    rh = sh - np.asarray(gp.h(x), float)
    return float(np.sqrt(cv @ cv + rg @ rg + rh @ rh))


def auglag_solve(gp: GeneralMpcc, cfg: Optional[AuglagConfig] = None,
                 x_init: Optional[Vector] = None) -> AuglagReport:
    """Run the outer loop until feasibility and stationarity tolerances hold.

    The subproblem is warm-started from the previous solution and solved to
    the running tolerance omega; on sufficient violation decrease the
    multipliers take a first-order update and both tolerances tighten,
    otherwise the penalty is multiplied by ten.
    """
    cfg = cfg or AuglagConfig()
    st = AuglagState(y=np.zeros(gp.m), z_g=np.zeros(gp.p), z_h=np.zeros(gp.p),
                     rho=cfg.rho0, omega=cfg.omega0, eta=cfg.eta0)

    l0, u0 = _fold_bounds(gp)
    x = np.clip(np.zeros(gp.n) if x_init is None else np.asarray(x_init, float), l0, u0)
    sg = np.asarray(gp.g(x), float)
    sh = np.asarray(gp.h(x), float)

    records: list = []
    sub_reports: list = []
    status = "iteration_limit"
    for it in range(cfg.max_outer):
        sub = build_subproblem(gp, st)
        start = project_feasible(PartitionedPoint(x, sg, sh), sub)
        sub_cfg = replace(cfg.subproblem,
                          stationarity_tol=max(st.omega, cfg.omega_min))
        rep = slpcc_solve(sub, start, sub_cfg)
        sub_reports.append(rep)
        x = rep.final_point.x0.copy()
        sg = rep.final_point.x1.copy()
        sh = rep.final_point.x2.copy()
        viol = _violation(gp, x, sg, sh)
        records.append(AuglagRecord(it, viol, rep.final_chi, st.rho, rep.status))

        if viol <= cfg.tol_feasibility and rep.final_chi <= cfg.tol_stationarity:
            status = "converged"
            break
        if viol <= st.eta:
            cv = gp.eval_c(x)
            rg = sg - np.asarray(gp.g(x), float)
            rh = sh - np.asarray(gp.h(x), float)
            st.y = st.y - st.rho * cv
            st.z_g = st.z_g - st.rho * rg
            st.z_h = st.z_h - st.rho * rh
            st.omega = max(st.omega / st.rho, cfg.omega_min)
            st.eta = st.eta / st.rho ** 0.9
        else:
            st.rho *= cfg.penalty_factor
            if st.rho > cfg.penalty_max:
                status = "penalty_overflow"
                break

    return AuglagReport(status=status, records=records, x=x, s_g=sg, s_h=sh,
                        multipliers_y=st.y, multipliers_g=st.z_g,
                        multipliers_h=st.z_h, rho=st.rho,
                        subproblem_reports=sub_reports)


def nash1_problem() -> GeneralMpcc:
    """Two-player Nash equilibrium model with linear coupling constraints.

    Four decision variables, two complementarity function pairs and simple
    bounds on the first two variables; the known strongly stationary point
    is (x, s_g, s_h) = (5, 9, 5, 9, 1, 19, 0, 0).
    """
    Q = np.zeros((4, 4))
    for i, j in ((0, 2), (1, 3)):
        Q[i, i] += 1.0
        Q[j, j] += 1.0
        Q[i, j] -= 1.0
        Q[j, i] -= 1.0

    Jg = np.array([[0.0, -1.0, -1.0, 0.0],
                   [-1.0, 0.0, 0.0, 1.0]])
    bg = np.array([15.0, 15.0])
    Jh = np.array([[0.0, 0.0, -2.0, -8.0 / 3.0],
                   [0.0, 0.0, -1.25, -2.0]])
    bh = np.array([34.0, 24.25])

    return GeneralMpcc(
        n=4, m=0, p=2,
        f=lambda x: float(0.5 * x @ (Q @ x)),
        grad_f=lambda x: Q @ x,
        hess_f=lambda x: Q,
        g=lambda x: Jg @ x + bg,
        jac_g=lambda x: Jg,
        h=lambda x: Jh @ x + bh,
        jac_h=lambda x: Jh,
        lx=np.array([0.0, 0.0, -np.inf, -np.inf]),
        ux=np.array([10.0, 10.0, np.inf, np.inf]),
        linear_constraints=True,
        name="nash1",
    )

NASH1_REFERENCE = np.array([5.0, 9.0, 5.0, 9.0, 1.0, 19.0, 0.0, 0.0])
