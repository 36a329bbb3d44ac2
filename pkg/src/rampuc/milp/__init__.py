"""MILP substrate: problem container, bounded simplex, branch-and-bound, LP export."""

from .bnb import branch_and_bound
from .external import solve_external
from .lpfile import export_lp_file, lp_text, parse_lp_text, read_lp_file
from .problem import (
    EQ,
    GAP_LIMIT,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    LinExpr,
    MilpProblem,
    SolveResult,
    Violation,
    check_feasibility,
    var,
)
from .simplex import BoundedSimplex, dual_objective, solve_lp

BACKENDS = ("builtin", "external")


def solve(problem: MilpProblem, gap: float = 1e-3, backend: str = "builtin", **kw) -> SolveResult:
    """Dispatch to the built-in branch-and-bound or the external command hook."""
    if backend == "builtin":
        return branch_and_bound(problem, gap, **kw)
    if backend == "external":
        return solve_external(problem, gap, **kw)
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


__all__ = [
    "BACKENDS", "EQ", "GAP_LIMIT", "GE", "INFEASIBLE", "LE", "OPTIMAL", "UNBOUNDED",
    "BoundedSimplex", "LinExpr", "MilpProblem", "SolveResult", "Violation",
    "branch_and_bound", "check_feasibility", "dual_objective", "export_lp_file", "lp_text",
    "parse_lp_text", "read_lp_file", "solve", "solve_external", "solve_lp", "var",
]
