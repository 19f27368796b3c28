"""Solver-agnostic MILP construction, serialization and external solving."""

from .fileio import (
    LpParseError,
    lp_text,
    mps_text,
    parse_lp,
    parse_mps,
    read_lp,
    read_model,
    read_mps,
    write_lp,
    write_mps,
)
from .model import BINARY, CONTINUOUS, Constraint, LinExpr, MilpModel, ModelError, Var, lin_sum
from .solve import (
    ERROR,
    FEASIBLE_GAP,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Solution,
    SolutionParseError,
    parse_solution,
    solve,
)

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "Constraint",
    "ERROR",
    "FEASIBLE_GAP",
    "INFEASIBLE",
    "LinExpr",
    "LpParseError",
    "MilpModel",
    "ModelError",
    "OPTIMAL",
    "Solution",
    "SolutionParseError",
    "UNBOUNDED",
    "Var",
    "lin_sum",
    "lp_text",
    "mps_text",
    "parse_lp",
    "parse_mps",
    "parse_solution",
    "read_lp",
    "read_model",
    "read_mps",
    "solve",
    "write_lp",
    "write_mps",
]
