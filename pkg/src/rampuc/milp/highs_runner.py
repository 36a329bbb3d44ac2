"""Reference external solver: reads an LP file, solves with HiGHS, writes a solution file.

    python -m rampuc.milp.highs_runner model.lp model.sol --gap 0.001
"""

from __future__ import annotations

import argparse
import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import csr_matrix, vstack

from .external import write_solution
from .lpfile import read_lp_file
from .problem import EQ, GE, LE


def solve_file(lp_path, sol_path, gap: float = 1e-3, time_limit: float | None = None) -> str:
    p = read_lp_file(lp_path)
    n = p.num_vars
    c = np.zeros(n)
    for k, v in p.objective.items():
        c[k] = v
    rows, cols, vals = [], [], []
    lo, hi = [], []
    for i, con in enumerate(p.constraints):
        for k, v in con.coefs.items():
            rows.append(i)
            cols.append(k)
            vals.append(v)
        lo.append(con.rhs if con.sense in (GE, EQ) else -math.inf)
        hi.append(con.rhs if con.sense in (LE, EQ) else math.inf)
    integrality = np.array([1 if v.binary else 0 for v in p.variables])
    bounds = Bounds([v.lb for v in p.variables], [v.ub for v in p.variables])
    constraints = []
    if p.num_constraints:
        A = csr_matrix((vals, (rows, cols)), shape=(p.num_constraints, n))
        constraints.append(LinearConstraint(A, lo, hi))
    options = {"mip_rel_gap": gap, "disp": False}
    if time_limit:
        options["time_limit"] = time_limit
    res = milp(c, constraints=constraints, integrality=integrality, bounds=bounds, options=options)
    if res.x is None:
        status = {2: "infeasible", 3: "unbounded"}.get(res.status, "infeasible")
        write_solution(sol_path, status, math.nan, math.inf, 0, {})
        return status
    status = "optimal" if res.status == 0 else "gap-limit"
    g = float(getattr(res, "mip_gap", 0.0) or 0.0)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    x, obj = _polish(c, A if p.num_constraints else None, lo, hi, p, res.x)
    if x is None:
        x, obj = res.x, float(res.fun)
    values = {v.name: float(xi) for v, xi in zip(p.variables, x)}
    write_solution(sol_path, status, obj, g, nodes, values)
    return status


def _polish(c, A, lo, hi, p, x):
    """Re-solve the LP with binaries rounded and fixed, removing integrality slop."""
    lb = np.array([v.lb for v in p.variables], dtype=float)
    ub = np.array([v.ub for v in p.variables], dtype=float)
    for j, v in enumerate(p.variables):
        if v.binary:
            lb[j] = ub[j] = round(x[j])
    if A is None:
        return None, None
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    eq = lo == hi
    ub_rows = [A[~eq & np.isfinite(hi)], -A[~eq & np.isfinite(lo)]]
    b_ub = np.concatenate([hi[~eq & np.isfinite(hi)], -lo[~eq & np.isfinite(lo)]])
    res = linprog(c, A_ub=vstack(ub_rows).tocsr(), b_ub=b_ub, A_eq=A[eq], b_eq=lo[eq],
                  bounds=list(zip(lb, ub)), method="highs")
    if res.status != 0:
        return None, None
    return res.x, float(res.fun)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("lp")
    ap.add_argument("sol")
    ap.add_argument("--gap", type=float, default=1e-3)
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args(argv)
    solve_file(args.lp, args.sol, args.gap, args.time_limit)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
