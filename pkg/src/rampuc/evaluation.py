"""Monte Carlo comparison of day-ahead schedules under realized net-load uncertainty.

A schedule is solved once at the central forecast for each formulation.  Each
scenario then replays the day: commitments stay as scheduled, committed units
are re-dispatched period by period with ramp limits measured from the
previous realized dispatch, and unmet load is shed at VOLL.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .milp import EQ, LE, OPTIMAL, MilpProblem, solve_lp, var
from .requirements import study_requirements
from .tables import fmt
from .system import (
    FORMULATIONS,
    BoundaryCondition,
    Generator,
    InvariantError,
    NetLoadForecast,
    Study,
    StudyConfig,
)
from .ucmodel import GapLimitError, InfeasibleModelError, UcSolution, build_uc, solve_model

DEFAULT_MULTIPLIERS = (2.8, 3.0, 3.5)


@dataclass
class ScenarioSet:
    seed: int | None
    count: int
    demand_error: np.ndarray  # (count, T) MW
    wind_error: np.ndarray
    net_load: np.ndarray

    def __post_init__(self):
        if self.count < 1:
            raise InvariantError("scenarios", "need at least one scenario")
        if self.net_load.shape[0] != self.count:
            raise InvariantError("scenarios", "row count does not match count")


def generate_scenarios(forecast: NetLoadForecast, installed_wind: float, count: int, seed: int,
                       sigma_d_frac: float = 0.01, sigma_w_frac: float = 0.04,
                       sigma_mw: float | None = None) -> ScenarioSet:
    """Draw independent normal demand and wind errors per period.

    Realized net load is forecast + demand error - wind error, clamped at zero.
    A realized first period (``forecast.realized_first``) is never perturbed.
    With ``sigma_mw`` set, a single net-load error of that size is drawn
    instead and reported as the demand error.
    """
    if count < 1:
        raise InvariantError("scenarios", "need at least one scenario")
    rng = np.random.default_rng(seed)
    n = len(forecast)
    base = np.asarray(forecast.values, dtype=float)
    if sigma_mw is not None:
        sd = np.full(n, float(sigma_mw))
        sw = np.zeros(n)
    else:
        demand = np.asarray(forecast.demand if forecast.demand is not None else forecast.values, dtype=float)
        sd = sigma_d_frac * demand
        sw = np.full(n, sigma_w_frac * installed_wind)
    ed = rng.standard_normal((count, n)) * sd
    ew = rng.standard_normal((count, n)) * sw
    if forecast.realized_first:
        ed[:, 0] = 0.0
        ew[:, 0] = 0.0
    nl = np.maximum(base + ed - ew, 0.0)
    return ScenarioSet(seed, count, ed, ew, nl)


def grid_scenarios(forecast: NetLoadForecast, period: int, values: Sequence[float]) -> ScenarioSet:
    """One scenario per value: the central forecast with ``period`` replaced."""
    base = np.asarray(forecast.values, dtype=float)
    idx = period - forecast.start_period
    if not 0 <= idx < len(base):
        raise InvariantError("period", f"{period} outside the forecast")
    nl = np.tile(base, (len(values), 1))
    nl[:, idx] = np.asarray(values, dtype=float)
    return ScenarioSet(None, len(values), nl - base, np.zeros_like(nl), nl)


# ---------------------------------------------------------------------------
@dataclass
class ScenarioResult:
    generation_cost: float
    shed_mwh: float
    shed_cost: float
    spill_mwh: float
    shed: list[float]  # MW per period
    dispatch: dict[str, list[float]]


def _ramp_rows(prob: MilpProblem, name: str, g: Generator, p0, x0: int, p1, x1: int) -> None:
    """Ramp-up and ramp-down limits between consecutive periods (p0 may be a constant)."""
    prob.add_constraint(f"up_{name}", p1 - p0, LE,
                        g.ramp_rate * x0 + g.startup_ramp * (x1 - x0) + g.p_max * (1 - x1))
    prob.add_constraint(f"dn_{name}", p0 - p1, LE,
                        g.ramp_rate * x1 + g.shutdown_ramp * (x0 - x1) + g.p_max * (1 - x0))


def redispatch(generators: Sequence[Generator], commitment: dict[str, list[int]], x_prev: dict[str, int],
               p_prev: dict[str, float], net_load: Sequence[float], injection: Sequence[float],
               voll: float, x_after: dict[str, int] | None = None):
    """Economic re-dispatch LP over a short run of periods with fixed commitment.

    ``net_load[0]`` is the realized value to serve now; further entries are
    look-ahead forecasts.  Ramp limits start from ``p_prev``; a unit due off
    after the run (``x_after``) is capped at its shutdown ramp in the last
    period.  Shed and spill slack cost VOLL.  Returns (dispatch, shed, spill)
    for the first period only.
    """
    n = len(net_load)
    prob = MilpProblem("redispatch")
    p = {}
    for g in generators:
        xs = commitment[g.id]
        for k in range(n):
            hi = g.p_max * xs[k]
            nxt = xs[k + 1] if k + 1 < n else (x_after or {}).get(g.id)
            if xs[k] and nxt == 0:
                hi = min(hi, g.shutdown_ramp)
            p[g.id, k] = var(prob.add_var(f"p_{g.id}_{k}", min(g.p_min * xs[k], hi), hi))
            prob.add_objective(g.linear_cost * p[g.id, k])
        _ramp_rows(prob, f"{g.id}_0", g, p_prev[g.id], x_prev[g.id], p[g.id, 0], xs[0])
        for k in range(1, n):
            _ramp_rows(prob, f"{g.id}_{k}", g, p[g.id, k - 1], xs[k - 1], p[g.id, k], xs[k])
    slack = []
    for k in range(n):
        sh = var(prob.add_var(f"shed_{k}", 0.0, max(float(net_load[k]), 0.0)))
        sp = var(prob.add_var(f"spill_{k}", 0.0, math.inf))
        prob.add_objective(voll * (sh + sp))
        expr = sh - sp
        for g in generators:
            expr = expr + p[g.id, k]
        prob.add_constraint(f"balance_{k}", expr, EQ, float(net_load[k]) - float(injection[k]))
        slack.append((sh, sp))
    res = solve_lp(prob)
    if res.status != OPTIMAL:
        # inherited dispatch may violate a ramp row outright; relax ramping in the current period
        return _relaxed_redispatch(generators, commitment, net_load, injection, voll)
    x = res.x
    val = lambda e: e.const + math.fsum(c * x[j] for j, c in e.terms.items())
    dispatch = {g.id: val(p[g.id, 0]) for g in generators}
    return dispatch, val(slack[0][0]), val(slack[0][1])


def _relaxed_redispatch(generators, commitment, net_load, injection, voll):
    prob = MilpProblem("redispatch_relaxed")
    cols = {}
    for g in generators:
        if commitment[g.id][0]:
            cols[g.id] = prob.add_var(f"p_{g.id}", g.p_min, g.p_max)
            prob.add_objective(g.linear_cost * var(cols[g.id]))
    sh = prob.add_var("shed", 0.0, max(float(net_load[0]), 0.0))
    sp = prob.add_var("spill", 0.0, math.inf)
    prob.add_objective(voll * (var(sh) + var(sp)))
    expr = var(sh) - var(sp)
    for j in cols.values():
        expr = expr + var(j)
    prob.add_constraint("balance", expr, EQ, float(net_load[0]) - float(injection[0]))
    res = solve_lp(prob)
    dispatch = {g.id: (float(res.x[cols[g.id]]) if g.id in cols else 0.0) for g in generators}
    return dispatch, float(res.x[sh]), float(res.x[sp])


def evaluate_schedule(sol: UcSolution, net_load: Sequence[float], generators: Sequence[Generator],
                      boundary: BoundaryCondition, voll: float, period_hours: float = 1.0,
                      lookahead: int = 0, forecast: Sequence[float] | None = None) -> ScenarioResult:
    """Replay a fixed commitment against one realized net-load path.

    Each period is re-dispatched from the previous realized dispatch.  With
    ``lookahead`` > 0 the re-dispatch also sees that many later periods at
    their central ``forecast`` values (default: the schedule's own
    dispatch-plus-injection totals) and keeps ramp room for them.
    Generation cost counts no-load, linear and startup terms of the
    schedule's commitment with the re-dispatched output; shedding costs VOLL
    per MW and period, the same convention as the scheduling objective.
    """
    periods = sol.periods
    n = len(periods)
    if len(net_load) != n:
        raise InvariantError("scenario", f"{len(net_load)} values for {n} periods")
    if lookahead < 0:
        raise InvariantError("lookahead", "must be non-negative")
    if forecast is None:
        forecast = [math.fsum(sol.p(g.id, t) + sol.injection[(g.id, t)] for g in generators)
                    + sol.shed.get(t, 0.0) - sol.spill.get(t, 0.0) for t in periods]
    commitment = {g.id: sol.commitment(g.id) for g in generators}
    inj = [math.fsum(sol.injection[(g.id, t)] for g in generators) for t in periods]
    p_prev = dict(boundary.initial_power)
    x_prev = {g.id: boundary.history(g.id, periods[0] - 1) for g in generators}
    gen_parts, shed, spill = [], [], []
    dispatch = {g.id: [] for g in generators}
    for i, t in enumerate(periods):
        end = min(n, i + 1 + lookahead)
        window_nl = [float(net_load[i])] + [float(v) for v in forecast[i + 1:end]]
        x_after = {g.id: commitment[g.id][end] for g in generators} if end < n else None
        p, s, sp = redispatch(generators, {g.id: commitment[g.id][i:end] for g in generators},
                              x_prev, p_prev, window_nl, inj[i:end], voll, x_after)
        for g in generators:
            x = commitment[g.id][i]
            gen_parts += [g.no_load_cost * x, g.linear_cost * p[g.id], g.startup_cost * sol.y(g.id, t)]
            dispatch[g.id].append(p[g.id])
            x_prev[g.id] = x
        p_prev = p
        shed.append(s)
        spill.append(sp)
    return ScenarioResult(
        math.fsum(gen_parts), math.fsum(shed) * period_hours, voll * math.fsum(shed),
        math.fsum(spill) * period_hours, shed, dispatch)


# ---------------------------------------------------------------------------
@dataclass
class EvaluationReport:
    formulation: str
    multiplier: float
    status: str  # ok | infeasible | gap-limit
    schedule_cost: float = math.nan
    schedule_gap: float = math.nan
    message: str = ""
    generation_cost: list[float] = field(default_factory=list)
    shed_mwh: list[float] = field(default_factory=list)
    shed_cost: list[float] = field(default_factory=list)
    spill_mwh: list[float] = field(default_factory=list)
    schedule: UcSolution | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return len(self.generation_cost)

    @property
    def average_generation_cost(self) -> float:
        return math.fsum(self.generation_cost) / self.count if self.count else math.nan

    @property
    def average_shed_cost(self) -> float:
        return math.fsum(self.shed_cost) / self.count if self.count else math.nan

    @property
    def expected_cost(self) -> float:
        return self.average_generation_cost + self.average_shed_cost

    @property
    def shed_events(self) -> int:
        return sum(1 for v in self.shed_mwh if v > 1e-6)

    def add(self, r: ScenarioResult) -> None:
        self.generation_cost.append(r.generation_cost)
        self.shed_mwh.append(r.shed_mwh)
        self.shed_cost.append(r.shed_cost)
        self.spill_mwh.append(r.spill_mwh)


@dataclass
class Comparison:
    multipliers: list[float]
    reports: dict[float, dict[str, EvaluationReport]]
    scenarios: ScenarioSet

    def __getitem__(self, k):
        return self.reports[k]

    def summary_rows(self) -> list[dict]:
        rows = []
        for k in self.multipliers:
            for f in FORMULATIONS:
                r = self.reports[k][f]
                rows.append({
                    "multiplier": k, "formulation": f, "status": r.status,
                    "schedule_cost": r.schedule_cost,
                    "average_generation_cost": r.average_generation_cost,
                    "average_shed_cost": r.average_shed_cost,
                    "expected_cost": r.expected_cost,
                    "shed_events": r.shed_events, "scenarios": r.count,
                })
        return rows


def day_ahead_schedule(study: Study, formulation: str, multiplier: float, gap: float | None = None,
                       backend: str | None = None, **solver_kw) -> UcSolution:
    req = study_requirements(study.forecast, study.config, multiplier)
    m = build_uc(study.generators, study.forecast, study.boundary, study.config, req, formulation)
    return solve_model(m, gap, backend, **solver_kw)


def study_scenarios(study: Study, count: int, seed: int) -> ScenarioSet:
    cfg = study.config
    return generate_scenarios(study.forecast, cfg.installed_wind, count, seed,
                              cfg.sigma_demand_frac, cfg.sigma_wind_frac, cfg.sigma_mw)


def run_comparison(study: Study, multipliers: Sequence[float] = DEFAULT_MULTIPLIERS, count: int = 100,
                   seed: int = 0, scenarios: ScenarioSet | None = None, gap: float | None = None,
                   backend: str | None = None, formulations: Sequence[str] = FORMULATIONS,
                   lookahead: int = 0, **solver_kw) -> Comparison:
    """Solve both day-ahead schedules per multiplier and score them on a shared scenario set.

    ``solver_kw`` goes to the backend (``time_limit`` for the external one).  A
    schedule stopped by a node or time budget is evaluated and reported as
    ``gap-limit``; one with no incumbent has no scenario rows.
    """
    cfg: StudyConfig = study.config
    scenarios = scenarios or study_scenarios(study, count, seed)
    hours = cfg.period_minutes / 60.0
    reports: dict[float, dict[str, EvaluationReport]] = {}
    for k in multipliers:
        reports[k] = {}
        for f in formulations:
            try:
                sol = day_ahead_schedule(study, f, k, gap, backend, **solver_kw)
            except InfeasibleModelError as exc:
                reports[k][f] = EvaluationReport(f, k, "infeasible", message=str(exc))
                continue
            except GapLimitError as exc:
                reports[k][f] = EvaluationReport(f, k, "gap-limit", message=str(exc))
                continue
            # a time-limited incumbent is still scored, but the report says so
            status = "ok" if sol.status == OPTIMAL else "gap-limit"
            rep = EvaluationReport(f, k, status, sol.objective, sol.gap, schedule=sol)
            for row in scenarios.net_load:
                rep.add(evaluate_schedule(sol, row, study.generators, study.boundary, cfg.voll, hours,
                                          lookahead, study.forecast.values))
            reports[k][f] = rep
    return Comparison(list(multipliers), reports, scenarios)


# ---------------------------------------------------------------------------
def report_csv(cmp: Comparison) -> str:
    """Per-scenario rows for every (multiplier, formulation) followed by aggregate rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["record", "multiplier", "formulation", "scenario", "generation_cost",
                "shed_mwh", "shed_cost", "spill_mwh"])
    for k in cmp.multipliers:
        for f in FORMULATIONS:
            r = cmp.reports[k].get(f)
            if r is None:
                continue
            for i in range(r.count):
                w.writerow(["scenario", fmt(k), f, i, fmt(r.generation_cost[i]), fmt(r.shed_mwh[i]),
                            fmt(r.shed_cost[i]), fmt(r.spill_mwh[i])])
    w.writerow([])
    w.writerow(["record", "multiplier", "formulation", "status", "average_generation_cost",
                "average_shed_cost", "expected_cost", "shed_events", "scenarios"])
    for row in cmp.summary_rows():
        w.writerow(["aggregate", fmt(row["multiplier"]), row["formulation"], row["status"],
                    fmt(row["average_generation_cost"]), fmt(row["average_shed_cost"]),
                    fmt(row["expected_cost"]), row["shed_events"], row["scenarios"]])
    return buf.getvalue()


def plot_data_csv(cmp: Comparison) -> str:
    """Multiplier versus expected cost, one column pair per formulation."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["multiplier", "formulation", "expected_cost", "average_generation_cost",
                "average_shed_cost", "shed_events"])
    for row in cmp.summary_rows():
        w.writerow([fmt(row["multiplier"]), row["formulation"], fmt(row["expected_cost"]),
                    fmt(row["average_generation_cost"]), fmt(row["average_shed_cost"]), row["shed_events"]])
    return buf.getvalue()


__all__ = [
    "Comparison", "EvaluationReport", "ScenarioResult", "ScenarioSet",
    "day_ahead_schedule", "evaluate_schedule", "generate_scenarios", "grid_scenarios",
    "plot_data_csv", "redispatch", "report_csv", "run_comparison", "study_scenarios",
]
