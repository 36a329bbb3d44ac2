"""Independent reference computations used to check the package.

The brute-force MILP oracle enumerates every assignment of the free binaries
and solves the remaining LP with scipy's HiGHS interface, so it shares no
code with the built-in simplex or branch-and-bound.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from rampuc.milp import MilpProblem
from rampuc.system import FAST, MUST_RUN, SLOW, BoundaryCondition, Generator, NetLoadForecast, StudyConfig


def brute_force(problem: MilpProblem) -> tuple[float, np.ndarray | None]:
    """Minimum objective over all binary assignments; (inf, None) when infeasible."""
    c, A, senses, b, lb, ub = problem.arrays()
    free = problem.free_binaries()
    le = [i for i, s in enumerate(senses) if s == "<="]
    ge = [i for i, s in enumerate(senses) if s == ">="]
    eq = [i for i, s in enumerate(senses) if s == "="]
    A_ub = np.vstack([A[le], -A[ge]]) if le or ge else None
    b_ub = np.concatenate([b[le], -b[ge]]) if le or ge else None
    A_eq = A[eq] if eq else None
    b_eq = b[eq] if eq else None
    fixed_lb, fixed_ub = lb.copy(), ub.copy()
    for j in problem.binary_indices:
        if j not in free:
            fixed_lb[j] = fixed_ub[j] = round(lb[j])
    # rows touching only binaries are checked before paying for an LP
    binmask = np.zeros(len(c), bool)
    binmask[problem.binary_indices] = True
    pure = [i for i in range(len(b)) if not np.any(A[i, ~binmask])]
    best, best_x = math.inf, None
    for bits in itertools.product((0.0, 1.0), repeat=len(free)):
        lo, hi = fixed_lb.copy(), fixed_ub.copy()
        lo[free] = hi[free] = bits
        xb = lo * binmask
        ok = True
        for i in pure:
            lhs = float(A[i] @ xb)
            if (senses[i] == "<=" and lhs > b[i] + 1e-9) or (senses[i] == ">=" and lhs < b[i] - 1e-9) \
                    or (senses[i] == "=" and abs(lhs - b[i]) > 1e-9):
                ok = False
                break
        if not ok:
            continue
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=list(zip(lo, np.where(np.isinf(hi), None, hi))), method="highs")
        if res.status == 0 and res.fun < best:
            best, best_x = float(res.fun), res.x
    return best, best_x


def random_uc_case(rng: np.random.Generator, max_units: int = 3, periods: int = 3):
    """Small random fleet and window; returns (generators, forecast, boundary, config).

    Commitments of periods 0 and 1 are fixed, as in a rolling step, so each
    non-must-run unit contributes three free binaries per later period.
    """
    gens = []
    n = int(rng.integers(2, max_units + 1))
    for i in range(n):
        kind = [FAST, SLOW, MUST_RUN][int(rng.choice(3, p=[0.6, 0.3, 0.1]))]
        p_max = float(rng.integers(8, 30) * 5)
        if kind == MUST_RUN:
            gens.append(Generator(f"U{i}", kind, 0.0, float(rng.integers(0, 10)), 0.0, p_max, p_max, 0, 0, 0))
            continue
        p_min = float(rng.integers(2, int(p_max / 5) // 2 + 3) * 5)
        p_min = min(p_min, p_max)
        ramp = float(rng.integers(8, 30) * 5)
        su_ramp = max(p_min, float(rng.integers(4, 20) * 5))
        su_ramp = min(su_ramp, p_max)
        traj_kw = {}
        if kind == SLOW:
            traj_kw = dict(startup_trajectory=(p_min / 2,), shutdown_trajectory=(p_min / 2,))
        gens.append(Generator(
            f"U{i}", kind, float(rng.integers(0, 40) * 10), float(rng.integers(10, 60)),
            float(rng.integers(0, 100) * 10), p_max, p_min, ramp, su_ramp, su_ramp,
            min_up=int(rng.integers(1, 3)), min_down=int(rng.integers(1, 3)), **traj_kw))
    x0 = {g.id: (1 if g.kind == MUST_RUN else int(rng.integers(0, 2))) for g in gens}
    p0 = {g.id: (float(rng.uniform(g.p_min, g.p_max)) if x0[g.id] else 0.0) for g in gens}
    base = sum(p0.values())
    cap = sum(g.p_max for g in gens)
    nl = [max(base, 1.0)]
    for _ in range(periods - 1):
        nl.append(float(np.clip(nl[-1] + rng.uniform(-30, 30), 0.2 * cap, 0.9 * cap)))
    fixed = {(g.id, t): x0[g.id] for g in gens for t in (0, 1)}
    bc = BoundaryCondition(1, p0, fixed)
    cfg = StudyConfig(horizon=periods, window_length=periods, sigma_mw=float(rng.integers(0, 11)),
                      mip_gap=1e-9)
    return gens, NetLoadForecast(tuple(nl), 1, True), bc, cfg
