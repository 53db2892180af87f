import numpy as np
import pytest

from slpcc import MpccProblem, PartitionedPoint


def cubic_corner_problem() -> MpccProblem:
    """Two-variable problem min x1^3 - (x2 - 0.5 x2^2) s.t. 0 <= x1 _|_ x2 >= 0.

    Global minimizer (0, 1) with value -0.5; the positive x1 axis is a trap
    for purely quadratic model steps, which makes this the canonical check
    that the solver turns the corner at the origin.
    """

    def f(x):
        return x[0] ** 3 - (x[1] - 0.5 * x[1] ** 2)

    def grad(x):
        return np.array([3.0 * x[0] ** 2, x[1] - 1.0])

    def hess(x):
        return np.array([[6.0 * x[0], 0.0], [0.0, 1.0]])

    return MpccProblem(n0=0, n1=1, l0=np.zeros(0), u0=np.zeros(0),
                       f=f, grad=grad, hess=hess, name="cubic-corner")


@pytest.fixture
def cubic_problem():
    return cubic_corner_problem()


def pair_point(x1, x2) -> PartitionedPoint:
    return PartitionedPoint(np.zeros(0), np.atleast_1d(np.asarray(x1, float)),
                            np.atleast_1d(np.asarray(x2, float)))


def random_problem(rng, n0=None, n1=None, box=10.0) -> tuple[MpccProblem, PartitionedPoint]:
    """Small random quadratic MPCC plus a random feasible point."""
    n0 = int(rng.integers(0, 4)) if n0 is None else n0
    n1 = int(rng.integers(0 if n0 else 1, 4)) if n1 is None else n1
    n = n0 + 2 * n1
    l0 = rng.uniform(-box, 0.0, n0)
    u0 = rng.uniform(0.5, box, n0)
    a = rng.normal(size=(n, n))
    h = 0.5 * (a + a.T)
    g = rng.uniform(-5.0, 5.0, n)

    def f(x, h=h, g=g):
        return float(0.5 * x @ (h @ x) + g @ x)

    def grad(x, h=h, g=g):
        return h @ x + g

    def hess(x, h=h):
        return h

    prob = MpccProblem(n0=n0, n1=n1, l0=l0, u0=u0, f=f, grad=grad, hess=hess)
    x0 = rng.uniform(l0, u0) if n0 else np.zeros(0)
    x1 = np.where(rng.random(n1) < 0.5, 0.0, rng.uniform(0.0, box, n1))
    x2 = np.where(x1 > 0.0, 0.0, np.where(rng.random(n1) < 0.3, 0.0, rng.uniform(0.0, box, n1)))
    return prob, PartitionedPoint(x0, x1, x2)
