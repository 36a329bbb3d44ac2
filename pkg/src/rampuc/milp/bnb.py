"""Best-bound branch-and-bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np

from .problem import GAP_LIMIT, INFEASIBLE, OPTIMAL, UNBOUNDED, MilpProblem, SolveResult
from .simplex import BoundedSimplex

INT_TOL = 1e-6


def relative_gap(incumbent: float, bound: float) -> float:
    if not math.isfinite(incumbent):
        return math.inf
    if incumbent == bound:
        return 0.0
    return max(0.0, incumbent - bound) / max(abs(incumbent), 1e-10)


def _most_fractional(x: np.ndarray, binaries: np.ndarray) -> int:
    if binaries.size == 0:
        return -1
    frac = np.abs(x[binaries] - np.round(x[binaries]))
    best = int(np.argmax(frac))  # argmax returns the first maximum: lowest index wins ties
    if frac[best] <= INT_TOL:
        return -1
    return int(binaries[best])


def branch_and_bound(problem: MilpProblem, gap: float = 1e-3, *, node_limit: int = 200_000,
                     time_limit: float | None = None) -> SolveResult:
    """Minimise ``problem`` with binaries enforced.

    Nodes are explored best-bound first (ties: deeper node, then creation
    order); branching picks the most fractional binary, lowest index on ties.
    Stops once the incumbent is within ``gap`` (relative) of the best open
    bound, or with status ``gap-limit`` when a node or time budget runs out.
    """
    problem.validate()
    lp = BoundedSimplex.from_problem(problem)
    names = [v.name for v in problem.variables]
    lb0 = np.array([v.lb for v in problem.variables], dtype=float)
    ub0 = np.array([v.ub for v in problem.variables], dtype=float)
    binaries = np.array(problem.binary_indices, dtype=np.int64)
    start = time.perf_counter()

    root = lp.solve(lb0, ub0)
    iterations = root.iterations
    if root.status != OPTIMAL:
        return SolveResult(root.status, None, math.nan, math.inf, 1, names, iterations=iterations)
    root_bound = root.objective

    counter = itertools.count()
    heap = [(root.objective, 0, next(counter), lb0, ub0, root)]
    incumbent_x, incumbent = None, math.inf
    nodes = 1
    hit_budget = False

    while heap:
        bound = heap[0][0]
        if relative_gap(incumbent, bound) <= gap:
            break
        if nodes >= node_limit or (time_limit is not None and time.perf_counter() - start > time_limit):
            hit_budget = True
            break
        obj, negdepth, _, lo, hi, sol = heapq.heappop(heap)
        if obj >= incumbent:
            continue
        j = _most_fractional(sol.x, binaries)
        if j < 0:
            x = sol.x.copy()
            x[binaries] = np.round(x[binaries])
            incumbent_x, incumbent = x, obj
            continue
        for value in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = value
            child = lp.solve(clo, chi)
            nodes += 1
            iterations += child.iterations
            if child.status == UNBOUNDED:
                return SolveResult(UNBOUNDED, None, math.nan, math.inf, nodes, names, iterations=iterations)
            if child.status != OPTIMAL or child.objective >= incumbent:
                continue
            heapq.heappush(heap, (child.objective, negdepth - 1, next(counter), clo, chi, child))

    best_bound = min([heap[0][0]] if heap else [incumbent])
    best_bound = min(best_bound, incumbent)
    if incumbent_x is None:
        status = GAP_LIMIT if hit_budget else INFEASIBLE
        return SolveResult(status, None, math.nan, math.inf, nodes, names,
                           iterations=iterations, root_bound=root_bound)
    g = relative_gap(incumbent, best_bound)
    status = GAP_LIMIT if hit_budget and g > gap else OPTIMAL
    return SolveResult(status, incumbent_x, incumbent, g, nodes, names,
                       iterations=iterations, root_bound=root_bound)
