"""Benchmark instance generation and the analytic test-function catalog.

Two instance classes are provided: random sparse quadratics (indefinite or
positive semidefinite Hessian, all data rounded to four decimal digits) and
five classic nonlinear functions equipped with bounds and complementarity
constraints under two index pairings.  A small built-in augmented-Lagrangian
objective derived from a two-player equilibrium model rounds out the set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import MpccProblem, PartitionedPoint, Vector, project_feasible

FAMILIES = ("fletcher", "himmelblau", "mccormick", "powell", "rosenbrock")
SPECTRUM_CLASSES = ("ind", "psd")

NASH1A_RHO = 2.0
NASH1A_LAMBDA = (3.9375, -6.5, -0.25, 2.5)

_PSD_SHIFT = 1e-2  # eigenvalue floor before rounding; survives 4-digit rounding


def round4(x):
    """Round half away from zero at four decimal places."""
    a = np.asarray(x, dtype=float)
    return np.sign(a) * np.floor(np.abs(a) * 1e4 + 0.5) / 1e4


@dataclass(frozen=True)
class QuadraticInstance:
    """Random quadratic objective 0.5 x^T H x + g^T x with box/complementarity
    constraints; H is stored as upper-triangle triplets of 4-digit values."""

    n0: int
    n1: int
    h_triplets: tuple
    g: Vector
    l0: Vector
    u0: Vector
    seed: int
    spectrum_class: str

    @property
    def n(self) -> int:
        return self.n0 + 2 * self.n1

    def dense_hessian(self) -> Vector:
        H = np.zeros((self.n, self.n))
        for i, j, v in self.h_triplets:
            H[i, j] = v
            H[j, i] = v
        return H


def generate_quadratic(n0: int, n1: int, spectrum_class: str, seed: int,
                       fill: float = 0.25) -> QuadraticInstance:
    """Draw a reproducible quadratic instance.

    The Hessian carries roughly fill * n^2 standard-normal nonzeros after
    symmetrization; the psd class squares such a matrix, rescales it to unit
    spectral norm, thresholds it back to the target fill and shifts its
    spectrum slightly positive so the 4-digit rounding cannot break
    semidefiniteness.
    """
    if n0 <= 0 or n1 <= 0:
        raise ValueError("need n0 > 0 and n1 > 0")
    if spectrum_class not in SPECTRUM_CLASSES:
        raise ValueError(f"spectrum_class must be one of {SPECTRUM_CLASSES}")
    rng = np.random.default_rng(seed)
    n = n0 + 2 * n1

    mask = np.triu(rng.random((n, n)) <= fill)
    vals = rng.standard_normal((n, n))
    H = np.where(mask, vals, 0.0)
    H = H + np.triu(H, 1).T

    if spectrum_class == "ind":
        # Keep the indefiniteness in the bounded block only.  Feasible rays
        # live entirely in the complementarity coordinates, so shifting that
        # block to be positive definite makes every instance bounded below
        # (raw normal data almost surely admits a feasible descent ray).
        pair = slice(n0, n)
        lam_min = float(np.linalg.eigvalsh(H[pair, pair]).min())
        if lam_min < 1.0:
            H[pair, pair] += (1.0 - lam_min) * np.eye(2 * n1)

    if spectrum_class == "psd":
        A = H @ H
        spectral = float(np.max(np.abs(np.linalg.eigvalsh(A))))
        if spectral > 0.0:
            A = A / spectral
        target = int(round(fill * n * n))
        flat = np.sort(np.abs(A).ravel())[::-1]
        thresh = flat[min(target, flat.size) - 1]
        A = np.where(np.abs(A) >= thresh, A, 0.0)
        lam_min = float(np.linalg.eigvalsh(A).min())
        if lam_min < _PSD_SHIFT:
            A = A + (_PSD_SHIFT - lam_min) * np.eye(n)
        H = A

    H = round4(H)
    g = round4(rng.uniform(-10.0, 10.0, n))

    l0 = np.empty(n0)
    u0 = np.empty(n0)
    for i in range(n0):
        while True:
            lo = round4(rng.uniform(-10.0, 10.0))
            hi = round4(rng.uniform(0.0, 20.0))
            if lo < hi:
                l0[i], u0[i] = lo, hi
                break

    iu, ju = np.nonzero(np.triu(H))
    triplets = tuple((int(i), int(j), float(H[i, j])) for i, j in zip(iu, ju))
    return QuadraticInstance(n0=n0, n1=n1, h_triplets=triplets, g=g,
                             l0=l0, u0=u0, seed=seed,
                             spectrum_class=spectrum_class)


def quadratic_problem(inst: QuadraticInstance) -> MpccProblem:
    H = inst.dense_hessian()
    g = np.asarray(inst.g, dtype=float)

    def f(x, H=H, g=g):
        return float(0.5 * x @ (H @ x) + g @ x)

    def grad(x, H=H, g=g):
        return H @ x + g

    def hess(x, H=H):
        return H

    name = f"{inst.n0}-{inst.spectrum_class}-{inst.seed}"
    return MpccProblem(n0=inst.n0, n1=inst.n1, l0=inst.l0, u0=inst.u0,
                       f=f, grad=grad, hess=hess, name=name)


# --- nonlinear catalog, natural variable ordering ---

def _fletcher(x, want_hess=True):
    n = x.size
    r = x[1:] - x[:-1] + 1.0 - x[:-1] ** 2
    f = 100.0 * float(r @ r)
    g = np.zeros(n)
    g[:-1] += 200.0 * r * (-1.0 - 2.0 * x[:-1])
    g[1:] += 200.0 * r
    if not want_hess:
        return f, g, None
    H = np.zeros((n, n))
    di = -1.0 - 2.0 * x[:-1]
    idx = np.arange(n - 1)
    H[idx, idx] += 200.0 * (di * di - 2.0 * r)
    H[idx + 1, idx + 1] += 200.0
    H[idx, idx + 1] += 200.0 * di
    H[idx + 1, idx] += 200.0 * di
    return f, g, H


def _himmelblau(x, want_hess=True):
    n = x.size
    a, b = x[0::2], x[1::2]
    t1 = a + b - 11.0
    t2 = a + b * b - 7.0
    f = float(t1 @ t1 + t2 @ t2)
    g = np.zeros(n)
    g[0::2] = 2.0 * t1 + 2.0 * t2
    g[1::2] = 2.0 * t1 + 4.0 * b * t2
    if not want_hess:
        return f, g, None
    H = np.zeros((n, n))
    i = np.arange(0, n, 2)
    H[i, i] = 4.0
    H[i, i + 1] = 2.0 + 4.0 * b
    H[i + 1, i] = 2.0 + 4.0 * b
    H[i + 1, i + 1] = 2.0 + 8.0 * b * b + 4.0 * t2
    return f, g, H


def _mccormick(x, want_hess=True):
    n = x.size
    a, b = x[:-1], x[1:]
    diff = a - b
    s = np.sin(a + b)
    f = float(np.sum(-1.5 * a + 2.5 * b + 1.0 + diff * diff + s))
    g = np.zeros(n)
    c = np.cos(a + b)
    g[:-1] += -1.5 + 2.0 * diff + c
    g[1:] += 2.5 - 2.0 * diff + c
    if not want_hess:
        return f, g, None
    H = np.zeros((n, n))
    idx = np.arange(n - 1)
    H[idx, idx] += 2.0 - s
    H[idx + 1, idx + 1] += 2.0 - s
    H[idx, idx + 1] += -2.0 - s
    H[idx + 1, idx] += -2.0 - s
    return f, g, H


def _powell(x, want_hess=True):
    n = x.size
    a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
    t1 = a + 10.0 * b
    t2 = c - d
    t3 = b - 2.0 * c
    t4 = a - d
    f = float(t1 @ t1 + 5.0 * t2 @ t2 + np.sum(t3 ** 4) + 10.0 * np.sum(t4 ** 4))
    g = np.zeros(n)
    g[0::4] = 2.0 * t1 + 40.0 * t4 ** 3
    g[1::4] = 20.0 * t1 + 4.0 * t3 ** 3
    g[2::4] = 10.0 * t2 - 8.0 * t3 ** 3
    g[3::4] = -10.0 * t2 - 40.0 * t4 ** 3
    if not want_hess:
        return f, g, None
    H = np.zeros((n, n))
    i = np.arange(0, n, 4)
    q3 = 12.0 * t3 ** 2
    q4 = 120.0 * t4 ** 2
    H[i, i] = 2.0 + q4
    H[i, i + 1] = H[i + 1, i] = 20.0
    H[i, i + 3] = H[i + 3, i] = -q4
    H[i + 1, i + 1] = 200.0 + q3
    H[i + 1, i + 2] = H[i + 2, i + 1] = -2.0 * q3
    H[i + 2, i + 2] = 10.0 + 4.0 * q3
    H[i + 2, i + 3] = H[i + 3, i + 2] = -10.0
    H[i + 3, i + 3] = 10.0 + q4
    return f, g, H


def _rosenbrock(x, want_hess=True):
    n = x.size
    r = x[1:] - x[:-1] ** 2
    f = float(100.0 * r @ r + np.sum((1.0 - x[:-1]) ** 2))
    g = np.zeros(n)
    g[:-1] += -400.0 * x[:-1] * r - 2.0 * (1.0 - x[:-1])
    g[1:] += 200.0 * r
    if not want_hess:
        return f, g, None
    H = np.zeros((n, n))
    idx = np.arange(n - 1)
    H[idx, idx] += 1200.0 * x[:-1] ** 2 - 400.0 * x[1:] + 2.0
    H[idx + 1, idx + 1] += 200.0
    H[idx, idx + 1] += -400.0 * x[:-1]
    H[idx + 1, idx] += -400.0 * x[:-1]
    return f, g, H


_EVALUATORS = {
    "fletcher": _fletcher,
    "himmelblau": _himmelblau,
    "mccormick": _mccormick,
    "powell": _powell,
    "rosenbrock": _rosenbrock,
}

CATALOG_UPPER_BOUND = 1e8


@dataclass(frozen=True)
class CatalogProblem:
    """Nonlinear catalog instance: n0 = n1, bounds [0, 1e8] on x0.

    compl_class 0 pairs variable i with variable n1+i of the natural
    ordering; class 1 pairs consecutive variables (2i-1, 2i).
    """

    family: str
    compl_class: int
    n0: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.compl_class not in (0, 1):
            raise ValueError("compl_class must be 0 or 1")
        if self.n0 <= 0:
            raise ValueError("n0 must be positive")
        n = self.n
        if self.family == "powell" and n % 4 != 0:
            raise ValueError(f"powell needs n divisible by 4, got n={n}")
        if self.family == "himmelblau" and n % 2 != 0:
            raise ValueError(f"himmelblau needs even n, got n={n}")

    @property
    def n1(self) -> int:
        return self.n0

    @property
    def n(self) -> int:
        return 3 * self.n0

    def natural_indices(self) -> Vector:
        """Map partition positions [x0 | x1 | x2] to natural positions."""
        n0, n1 = self.n0, self.n1
        if self.compl_class == 0:
            x1_nat = np.arange(n1)
            x2_nat = n1 + np.arange(n1)
        else:
            x1_nat = 2 * np.arange(n1)
            x2_nat = 2 * np.arange(n1) + 1
        x0_nat = 2 * n1 + np.arange(n0)
        return np.concatenate([x0_nat, x1_nat, x2_nat])


def catalog_eval(p: CatalogProblem, x: Vector, want_hess: bool = True):
    """Objective value, gradient and (optionally) Hessian at a
    partition-ordered point."""
    x = np.asarray(x, dtype=float)
    if x.size != p.n:
        raise ValueError(f"point has length {x.size}, expected {p.n}")
    perm = p.natural_indices()
    y = np.empty(p.n)
    y[perm] = x
    f, g_nat, h_nat = _EVALUATORS[p.family](y, want_hess)
    if not want_hess:
        return f, g_nat[perm], None
    return f, g_nat[perm], h_nat[np.ix_(perm, perm)]


def catalog_problem(p: CatalogProblem) -> MpccProblem:
    l0 = np.zeros(p.n0)
    u0 = np.full(p.n0, CATALOG_UPPER_BOUND)

    def f(x, p=p):
        return catalog_eval(p, x, want_hess=False)[0]

    def grad(x, p=p):
        return catalog_eval(p, x, want_hess=False)[1]

    def hess(x, p=p):
        return catalog_eval(p, x)[2]

    return MpccProblem(n0=p.n0, n1=p.n1, l0=l0, u0=u0, f=f, grad=grad,
                       hess=hess, name=f"{p.n0}-{p.family}{p.compl_class}")


def nash1a_objective(rho: float = NASH1A_RHO,
                     lam: Sequence[float] = NASH1A_LAMBDA) -> MpccProblem:
    """Quadratic augmented-Lagrangian objective of the two-player model.

    Four bound variables, two complementarity pairs; the multipliers and
    penalty default to the values that make the slow first-order convergence
    visible.  The Hessian is constant.
    """
    lam = tuple(float(v) for v in lam)
    if len(lam) != 4:
        raise ValueError("need exactly four multipliers")
    rho = float(rho)

    # Residual coefficient rows over v = (x01..x04, x11, x12, x21, x22).
    A = np.zeros((4, 8))
    b = np.zeros(4)
    A[0, 2], A[0, 3], A[0, 6], b[0] = 2.0, 8.0 / 3.0, 1.0, -34.0
    A[1, 2], A[1, 3], A[1, 7], b[1] = 1.25, 2.0, 1.0, -24.25
    A[2, 1], A[2, 2], A[2, 4], b[2] = 1.0, 1.0, 1.0, -15.0
    A[3, 0], A[3, 3], A[3, 5], b[3] = 1.0, -1.0, 1.0, -15.0
    w = np.array([lam[0], -lam[1], -lam[2], lam[3]])

    Q = np.zeros((8, 8))
    for i, j in ((0, 2), (1, 3)):
        Q[i, i] += 1.0
        Q[j, j] += 1.0
        Q[i, j] -= 1.0
        Q[j, i] -= 1.0

    H = Q + rho * (A.T @ A)
    lin = A.T @ w

    def f(x):
        r = A @ x + b
        return float(0.5 * x @ (Q @ x) + w @ r + 0.5 * rho * (r @ r))

    def grad(x):
        r = A @ x + b
        return Q @ x + lin + rho * (A.T @ r)

    def hess(x, H=H):
        return H

    big = 1e10
    return MpccProblem(n0=4, n1=2,
                       l0=[0.0, 0.0, -big, -big], u0=[10.0, 10.0, big, big],
                       f=f, grad=grad, hess=hess, name="nash1a")


def default_start(prob: MpccProblem) -> PartitionedPoint:
    """Zero vector projected to feasibility."""
    zero = PartitionedPoint(np.zeros(prob.n0), np.zeros(prob.n1), np.zeros(prob.n1))
    return project_feasible(zero, prob)
