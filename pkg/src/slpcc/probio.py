"""JSON problem-file schema: load, validate and save instances.

A problem file carries the dimensions, bounds, an objective description and
an optional starting point:

    {"n0": 2, "n1": 1, "l0": [...], "u0": [...],
     "objective": {"type": "quadratic", "H": [[i, j, v], ...], "g": [...]}
                | {"type": "catalog", "family": "rosenbrock", "compl_class": 0}
                | {"type": "nash1a", "rho": 2.0, "lambda": [...]},
     "x_init": [...]}                      # optional

Quadratic Hessians are stored as upper-triangle triplets with 0-based
indices and mirrored on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bench import (CatalogProblem, QuadraticInstance, catalog_eval,
                    nash1a_objective)
from .core import MpccProblem, Vector

OBJECTIVE_TYPES = ("quadratic", "catalog", "nash1a")


class ProblemFormatError(ValueError):
    """Schema violation; the message names the offending field."""


@dataclass(frozen=True)
class LoadedProblem:
    problem: MpccProblem
    x_init: Optional[Vector]
    doc: dict


def _require(doc: dict, key: str, kind, ctx: str = ""):
    where = f"{ctx}.{key}" if ctx else key
    if key not in doc:
        raise ProblemFormatError(f"missing field {where!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ProblemFormatError(f"field {where!r} must be a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ProblemFormatError(f"field {where!r} must be an integer")
        return value
    if not isinstance(value, kind):
        raise ProblemFormatError(f"field {where!r} has wrong type")
    return value


def _vector(doc: dict, key: str, length: int, ctx: str = "") -> Vector:
    raw = _require(doc, key, list, ctx)
    where = f"{ctx}.{key}" if ctx else key
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"field {where!r} must be a numeric array") from exc
    if arr.ndim != 1 or arr.size != length:
        raise ProblemFormatError(
            f"field {where!r} must have length {length}, got {arr.size}")
    return arr


def _quadratic_problem_from_doc(obj: dict, n0: int, n1: int,
                                l0: Vector, u0: Vector) -> MpccProblem:
    n = n0 + 2 * n1
    g = _vector(obj, "g", n, "objective")
    triplets = _require(obj, "H", list, "objective")
    H = np.zeros((n, n))
    for k, t in enumerate(triplets):
        if not (isinstance(t, (list, tuple)) and len(t) == 3):
            raise ProblemFormatError(f"field 'objective.H[{k}]' must be [i, j, value]")
        i, j, v = t
        if not (isinstance(i, int) and isinstance(j, int)):
            raise ProblemFormatError(f"field 'objective.H[{k}]' indices must be integers")
        if not (0 <= i <= j < n):
            raise ProblemFormatError(
                f"field 'objective.H[{k}]' must be upper-triangle with 0 <= i <= j < {n}")
        H[i, j] = float(v)
        H[j, i] = float(v)

    def f(x, H=H, g=g):
        return float(0.5 * x @ (H @ x) + g @ x)

    return MpccProblem(n0=n0, n1=n1, l0=l0, u0=u0, f=f,
                       grad=lambda x, H=H, g=g: H @ x + g,
                       hess=lambda x, H=H: H, name="quadratic")


def _catalog_problem_from_doc(obj: dict, n0: int, n1: int,
                              l0: Vector, u0: Vector) -> MpccProblem:
    family = _require(obj, "family", str, "objective")
    compl_class = _require(obj, "compl_class", int, "objective")
    if n0 != n1:
        raise ProblemFormatError("field 'n1' must equal 'n0' for catalog objectives")
    try:
        cat = CatalogProblem(family, compl_class, n0)
    except ValueError as exc:
        raise ProblemFormatError(f"field 'objective': {exc}") from exc
    return MpccProblem(
        n0=n0, n1=n1, l0=l0, u0=u0,
        f=lambda x, cat=cat: catalog_eval(cat, x, want_hess=False)[0],
        grad=lambda x, cat=cat: catalog_eval(cat, x, want_hess=False)[1],
        hess=lambda x, cat=cat: catalog_eval(cat, x)[2],
        name=f"{n0}-{family}{compl_class}")


def _nash1a_problem_from_doc(obj: dict, n0: int, n1: int,
                             l0: Vector, u0: Vector) -> MpccProblem:
    if (n0, n1) != (4, 2):
        raise ProblemFormatError("fields 'n0'/'n1' must be 4/2 for nash1a")
    rho = _require(obj, "rho", float, "objective")
    lam = _vector(obj, "lambda", 4, "objective")
    base = nash1a_objective(rho=rho, lam=lam)
    return MpccProblem(n0=4, n1=2, l0=l0, u0=u0, f=base.f, grad=base.grad,
                       hess=base.hess, name="nash1a")


def problem_from_doc(doc: dict) -> LoadedProblem:
    n0 = _require(doc, "n0", int)
    n1 = _require(doc, "n1", int)
    if n0 < 0 or n1 < 0 or n0 + n1 == 0:
        raise ProblemFormatError("fields 'n0'/'n1' must be nonnegative with n0+n1 > 0")
    l0 = _vector(doc, "l0", n0)
    u0 = _vector(doc, "u0", n0)
    if np.any(l0 >= u0):
        i = int(np.argmax(l0 >= u0))
        raise ProblemFormatError(f"field 'l0[{i}]' must be strictly below 'u0[{i}]'")
    obj = _require(doc, "objective", dict)
    kind = _require(obj, "type", str, "objective")
    if kind == "quadratic":
        prob = _quadratic_problem_from_doc(obj, n0, n1, l0, u0)
    elif kind == "catalog":
        prob = _catalog_problem_from_doc(obj, n0, n1, l0, u0)
    elif kind == "nash1a":
        prob = _nash1a_problem_from_doc(obj, n0, n1, l0, u0)
    else:
        raise ProblemFormatError(
            f"field 'objective.type' must be one of {OBJECTIVE_TYPES}")
    x_init = None
    if "x_init" in doc:
        x_init = _vector(doc, "x_init", n0 + 2 * n1)
    return LoadedProblem(problem=prob, x_init=x_init, doc=doc)


def load_problem(path) -> LoadedProblem:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem file must contain a JSON object")
    return problem_from_doc(doc)


def quadratic_doc(inst: QuadraticInstance) -> dict:
    return {
        "n0": inst.n0,
        "n1": inst.n1,
        "l0": inst.l0.tolist(),
        "u0": inst.u0.tolist(),
        "objective": {
            "type": "quadratic",
            "H": [[i, j, v] for i, j, v in inst.h_triplets],
            "g": inst.g.tolist(),
        },
        "seed": inst.seed,
        "spectrum_class": inst.spectrum_class,
    }


def catalog_doc(cat: CatalogProblem) -> dict:
    from .bench import CATALOG_UPPER_BOUND

    return {
        "n0": cat.n0,
        "n1": cat.n1,
        "l0": [0.0] * cat.n0,
        "u0": [CATALOG_UPPER_BOUND] * cat.n0,
        "objective": {
            "type": "catalog",
            "family": cat.family,
            "compl_class": cat.compl_class,
        },
    }


def nash1a_doc(rho: float = 2.0, lam=(3.9375, -6.5, -0.25, 2.5)) -> dict:
    big = 1e10
    return {
        "n0": 4,
        "n1": 2,
        "l0": [0.0, 0.0, -big, -big],
        "u0": [10.0, 10.0, big, big],
        "objective": {"type": "nash1a", "rho": rho, "lambda": list(lam)},
    }


def save_problem(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
