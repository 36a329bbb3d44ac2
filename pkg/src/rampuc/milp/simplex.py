"""Bounded-variable revised simplex.

Two-phase primal method on ``A x (<=,>=,=) b, lb <= x <= ub`` with an explicit
basis inverse maintained by product-form updates and periodic reinversion.
Pricing is Dantzig's rule; after a run of degenerate pivots it falls back to
Bland's smallest-index rule until progress resumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, MilpProblem, SolveResult

AT_LOWER, AT_UPPER, FREE, BASIC = 0, 1, 2, 3


@dataclass
class LpOutcome:
    status: str
    x: np.ndarray | None
    objective: float
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None
    iterations: int


class BoundedSimplex:
    """Reusable solver for one constraint matrix; bounds vary per call.

    Branch-and-bound builds one instance per problem and calls ``solve`` with
    the node's bounds.
    """

    refactor_every = 50
    degenerate_limit = 30

    def __init__(self, c, A, senses, b, *, max_iter: int = 200_000,
                 primal_tol: float = 1e-9, dual_tol: float = 1e-9, pivot_tol: float = 1e-9):
        self.c = np.asarray(c, dtype=float)
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.m, self.n = self.A.shape
        self.senses = list(senses)
        self.max_iter = max_iter
        scale_b = max(1.0, float(np.max(np.abs(self.b), initial=0.0)))
        scale_c = max(1.0, float(np.max(np.abs(self.c), initial=0.0)))
        self.ptol = primal_tol * scale_b
        self.dtol = dual_tol * scale_c
        self.pivot_tol = pivot_tol
        m = self.m
        self.slack_lb = np.zeros(m)
        self.slack_ub = np.zeros(m)
        for i, s in enumerate(self.senses):
            if s == LE:
                self.slack_ub[i] = math.inf
            elif s == GE:
                self.slack_lb[i] = -math.inf
            elif s != EQ:
                raise ValueError(f"unknown sense {s!r}")
        self.AT = np.ascontiguousarray(self.A.T)

    @classmethod
    def from_problem(cls, problem: MilpProblem, **kw) -> "BoundedSimplex":
        c, A, senses, b, _, _ = problem.arrays()
        return cls(c, A, senses, b, **kw)

    # ------------------------------------------------------------------
    def _column(self, j: int, sign: np.ndarray) -> np.ndarray:
        n, m = self.n, self.m
        if j < n:
            return self.A[:, j]
        col = np.zeros(m)
        if j < n + m:
            col[j - n] = 1.0
        else:
            col[j - n - m] = sign[j - n - m]
        return col

    def solve(self, lb, ub) -> LpOutcome:
        n, m = self.n, self.m
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub + self.ptol):
            return LpOutcome(INFEASIBLE, None, math.nan, None, None, 0)
        N = n + 2 * m
        L = np.concatenate([lb, self.slack_lb, np.zeros(m)])
        U = np.concatenate([ub, self.slack_ub, np.zeros(m)])
        x = np.zeros(N)
        state = np.full(N, AT_LOWER, dtype=np.int8)

        xs = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        x[:n] = xs
        state[:n] = np.where(np.isfinite(lb), AT_LOWER, np.where(np.isfinite(ub), AT_UPPER, FREE))
        resid = self.b - self.A @ xs

        sign = np.ones(m)
        basis = np.empty(m, dtype=np.int64)
        need_art = np.zeros(m, dtype=bool)
        for i in range(m):
            r = resid[i]
            if self.slack_lb[i] - self.ptol <= r <= self.slack_ub[i] + self.ptol:
                basis[i] = n + i
                x[n + i] = r
                state[n + i] = BASIC
            else:
                sign[i] = 1.0 if r > 0 else -1.0
                need_art[i] = True
                basis[i] = n + m + i
                x[n + m + i] = abs(r)
                U[n + m + i] = math.inf
                state[n + m + i] = BASIC
                # slack parks at its finite bound, which is zero for every sense
                state[n + i] = AT_LOWER if np.isfinite(self.slack_lb[i]) else AT_UPPER
                x[n + i] = 0.0
        Binv = np.diag(np.array([1.0 if basis[i] < n + m else sign[i] for i in range(m)]))

        total_iter = 0
        cost = np.zeros(N)
        if need_art.any():
            cost[n + m:] = need_art.astype(float)
            status, total_iter, Binv = self._iterate(cost, L, U, x, state, basis, Binv, sign, total_iter)
            infeas = float(np.sum(x[n + m:]))
            if infeas > max(self.ptol, 1e-7) * max(1.0, m ** 0.5):
                return LpOutcome(INFEASIBLE, None, math.nan, None, None, total_iter)
            U[n + m:] = 0.0
            for i in range(m):
                j = n + m + i
                if state[j] != BASIC:
                    state[j] = AT_LOWER
                x[j] = 0.0
        cost = np.zeros(N)
        cost[:n] = self.c
        status, total_iter, Binv = self._iterate(cost, L, U, x, state, basis, Binv, sign, total_iter)
        if status != OPTIMAL:
            return LpOutcome(status, None, math.nan, None, None, total_iter)
        y = cost[basis] @ Binv
        d = self.c - self.AT @ y
        xs = x[:n].copy()
        obj = float(math.fsum(self.c * xs))
        return LpOutcome(OPTIMAL, xs, obj, y, d, total_iter)

    def _reinvert(self, basis, sign):
        B = np.column_stack([self._column(int(j), sign) for j in basis])
        return np.linalg.inv(B)

    def _recompute_basics(self, x, basis, Binv, sign):
        n, m = self.n, self.m
        nb = x.copy()
        nb[basis] = 0.0
        rhs = self.b - self.A @ nb[:n] - nb[n:n + m] - sign * nb[n + m:]
        x[basis] = Binv @ rhs

    def _iterate(self, cost, L, U, x, state, basis, Binv, sign, it0):
        n, m = self.n, self.m
        fixed = (U - L) <= 0.0
        degenerate = 0
        since_refactor = 0
        it = it0
        while True:
            if it - it0 > self.max_iter:
                raise RuntimeError("simplex iteration limit reached")
            if since_refactor >= self.refactor_every:
                Binv = self._reinvert(basis, sign)
                self._recompute_basics(x, basis, Binv, sign)
                since_refactor = 0
            y = cost[basis] @ Binv
            d = np.empty_like(cost)
            d[:n] = cost[:n] - self.AT @ y
            d[n:n + m] = cost[n:n + m] - y
            d[n + m:] = cost[n + m:] - sign * y
            elig = np.zeros(len(cost), dtype=bool)
            elig |= (state == AT_LOWER) & (d < -self.dtol)
            elig |= (state == AT_UPPER) & (d > self.dtol)
            elig |= (state == FREE) & (np.abs(d) > self.dtol)
            elig &= ~fixed
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                return OPTIMAL, it, Binv
            bland = degenerate >= self.degenerate_limit
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = Binv @ self._column(q, sign)
            delta = -direction * alpha

            xB, lB, uB = x[basis], L[basis], U[basis]
            dec = (delta < -self.pivot_tol) & np.isfinite(lB)
            inc = (delta > self.pivot_tol) & np.isfinite(uB)
            ratio = np.full(m, math.inf)
            relaxed = np.full(m, math.inf)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio[dec] = (xB[dec] - lB[dec]) / -delta[dec]
                relaxed[dec] = (xB[dec] - lB[dec] + self.ptol) / -delta[dec]
                ratio[inc] = (uB[inc] - xB[inc]) / delta[inc]
                relaxed[inc] = (uB[inc] - xB[inc] + self.ptol) / delta[inc]
            theta_flip = U[q] - L[q]
            theta_max = float(relaxed.min()) if m else math.inf
            if not math.isfinite(theta_max) and not math.isfinite(theta_flip):
                return UNBOUNDED, it, Binv
            r = -1
            if theta_flip <= theta_max:
                theta = theta_flip
            else:
                rows = np.flatnonzero(ratio <= theta_max)
                if bland:
                    tmin = ratio[rows].min()
                    ties = rows[ratio[rows] <= tmin + self.ptol]
                    r = int(ties[np.argmin(basis[ties])])
                else:
                    r = int(rows[np.argmax(np.abs(delta[rows]))])
                theta = max(0.0, float(ratio[r]))
            it += 1
            since_refactor += 1
            if theta <= self.ptol:
                degenerate += 1
            else:
                degenerate = 0
            x[basis] += delta * theta
            x[q] += direction * theta
            if r < 0:
                state[q] = AT_UPPER if direction > 0 else AT_LOWER
                x[q] = U[q] if direction > 0 else L[q]
                continue
            leave = int(basis[r])
            if delta[r] < 0:
                state[leave] = AT_LOWER
                x[leave] = L[leave]
            else:
                state[leave] = AT_UPPER
                x[leave] = U[leave]
            basis[r] = q
            state[q] = BASIC
            piv = alpha[r]
            row_r = Binv[r] / piv
            Binv -= np.outer(alpha, row_r)
            Binv[r] = row_r


def solve_lp(problem: MilpProblem, lb=None, ub=None) -> SolveResult:
    """Solve the continuous relaxation of ``problem`` (integrality ignored)."""
    solver = BoundedSimplex.from_problem(problem)
    lo = np.array([v.lb for v in problem.variables]) if lb is None else np.asarray(lb, float)
    hi = np.array([v.ub for v in problem.variables]) if ub is None else np.asarray(ub, float)
    out = solver.solve(lo, hi)
    names = [v.name for v in problem.variables]
    return SolveResult(out.status, out.x, out.objective, 0.0, 1, names,
                       out.duals, out.reduced_costs, out.iterations, out.objective)


def dual_objective(problem: MilpProblem, result: SolveResult, tol: float = 1e-9) -> float:
    """Bounded-variable dual objective evaluated at ``result``'s row duals."""
    c, A, senses, b, lb, ub = problem.arrays()
    y = result.duals
    d = c - A.T @ y
    total = [float(b @ y)]
    for j in range(len(c)):
        if d[j] > tol:
            total.append(d[j] * lb[j])
        elif d[j] < -tol:
            total.append(d[j] * ub[j])
    return math.fsum(total)
