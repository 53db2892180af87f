"""Trust-region solver for bound-constrained mathematical programs with
complementarity constraints, with benchmark generation and an augmented
Lagrangian outer method for general problems."""

from .core import (ActiveSets, ConfigError, MpccProblem, PartitionedPoint,
                   SolverConfig, active_sets, is_feasible, make_point,
                   project_feasible, projected_residual, stationarity_measure)
from .lpcc import ComplCase, LpccStep, candidate_set, classify_case, solve_lpcc
from .driver import IterateRecord, SolveReport, accept_ratio, slpcc_solve
from .cauchy import PiecewisePath, build_path, find_cauchy_point
from .bqp import (BqpResult, BqpSubproblem, bqp_step, build_bqp,
                  partition_biactive, solve_bqp_inner)

__all__ = [
    "ActiveSets", "BqpResult", "BqpSubproblem", "ComplCase", "ConfigError",
    "IterateRecord", "LpccStep", "MpccProblem", "PartitionedPoint",
    "PiecewisePath", "SolveReport", "SolverConfig", "accept_ratio",
    "active_sets", "bqp_step", "build_bqp", "build_path", "candidate_set",
    "classify_case", "find_cauchy_point", "is_feasible", "make_point",
    "partition_biactive", "project_feasible", "projected_residual",
    "slpcc_solve", "solve_lpcc",
    "stationarity_measure",
]
