"""Rolling look-ahead emulation and deliverable-FRC audit.

Each step solves a window ``t .. t+L-1``.  Dispatch in period t-1 and the
commitment of period t are inherited from the previous step; commitments from
t+1 onward are free.  The window's first value is the realized net load, so
the window solution at t is the realized dispatch.  Shed and spill slack
priced at VOLL keep every step solvable when the inherited commitment
cannot follow the realization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .requirements import FrcRequirements, study_requirements
from .system import (
    BoundaryCondition,
    Generator,
    InvariantError,
    NetLoadForecast,
    Study,
)
from .ucmodel import UcSolution, build_uc, solve_model

TOL = 1e-6


@dataclass
class FrcAudit:
    periods: list[int]  # transition t -> t+1, one entry per window period but the last
    requirement_upward: list[float]
    requirement_downward: list[float]
    awarded_upward: list[float]  # sum of ur chosen by the solver
    awarded_downward: list[float]
    scheduled_upward: list[float]  # largest sum of ur the capability rows admit
    scheduled_downward: list[float]
    deliverable_upward: list[float]
    deliverable_downward: list[float]
    shortfall_flag: list[bool]

    def rows(self) -> list[dict]:
        out = []
        for i, t in enumerate(self.periods):
            out.append({
                "period": t,
                "ufrc": self.requirement_upward[i],
                "dfrc": self.requirement_downward[i],
                "awarded_up": self.awarded_upward[i],
                "awarded_down": self.awarded_downward[i],
                "scheduled_up": self.scheduled_upward[i],
                "scheduled_down": self.scheduled_downward[i],
                "deliverable_up": self.deliverable_upward[i],
                "deliverable_down": self.deliverable_downward[i],
                "shortfall": self.shortfall_flag[i],
            })
        return out


def _cap_next(sol: UcSolution, g: Generator, t: int) -> float:
    """Highest p-bar the unit may reach in t+1 given its state in t+2."""
    if (("x", g.id, t + 2) in sol.values) and sol.x(g.id, t + 1) and not sol.x(g.id, t + 2):
        return min(g.p_max, g.shutdown_ramp)
    return g.p_max


def unit_capability(sol: UcSolution, g: Generator, t: int) -> tuple[float, float, float, float]:
    """(scheduled_up, scheduled_down, deliverable_up, deliverable_down) of one unit for t -> t+1."""
    x0, x1 = sol.x(g.id, t), sol.x(g.id, t + 1)
    p0 = sol.p(g.id, t)
    inj0, inj1 = sol.injection[(g.id, t)], sol.injection[(g.id, t + 1)]
    cap = _cap_next(sol, g, t)
    if x0 and x1:
        up = max(min(g.ramp_rate, cap - p0), 0.0)
        dn = max(min(g.ramp_rate, p0 - g.p_min), 0.0)
        return up, dn, up, dn
    if x0 and not x1:
        # departing: output falls to the first shutdown-trajectory point (zero for fast units)
        return 0.0, min(p0, g.shutdown_ramp, g.p_max), inj1 - p0, p0 - inj1
    if x1:
        up = min(g.startup_ramp, cap)
        return up, -g.p_min, up - inj0, inj0 - g.p_min
    return 0.0, 0.0, inj1 - inj0, inj0 - inj1


def audit_deliverable_frc(sol: UcSolution, generators: Sequence[Generator],
                          req: FrcRequirements | None = None) -> FrcAudit:
    """Compare FRC the schedule claims with what the committed fleet can physically deliver.

    Deliverable upward capability sums each staying unit's headroom, bounded by
    its ramp rate, and subtracts the output lost from units leaving in t+1
    (for slow units the drop to the first trajectory point and the later
    trajectory decrements).  Downward mirrors this.
    """
    req = req or sol.requirements
    periods = sol.periods[:-1]
    cols = {k: [] for k in ("su", "sd", "du", "dd", "au", "ad")}
    for t in periods:
        parts = [unit_capability(sol, g, t) for g in generators]
        cols["su"].append(math.fsum(p[0] for p in parts))
        cols["sd"].append(math.fsum(p[1] for p in parts))
        cols["du"].append(math.fsum(p[2] for p in parts))
        cols["dd"].append(math.fsum(p[3] for p in parts))
        cols["au"].append(sol.total("ur", t))
        cols["ad"].append(sol.total("dr", t))
    ru = list(req.upward[:len(periods)]) if req else [0.0] * len(periods)
    rd = list(req.downward[:len(periods)]) if req else [0.0] * len(periods)
    flags = [du < u - TOL or dd < d - TOL for du, dd, u, d in zip(cols["du"], cols["dd"], ru, rd)]
    return FrcAudit(list(periods), ru, rd, cols["au"], cols["ad"], cols["su"], cols["sd"],
                    cols["du"], cols["dd"], flags)


# ---------------------------------------------------------------------------
@dataclass
class RollingStep:
    start: int
    boundary: BoundaryCondition
    forecast: NetLoadForecast
    requirements: FrcRequirements
    solution: UcSolution
    realized_nl: float
    dispatch: dict[str, float]
    injection: dict[str, float]
    shed: float
    spill: float
    cost: float
    audit: FrcAudit


@dataclass
class RollingLog:
    formulation: str
    generators: tuple[Generator, ...]
    steps: list[RollingStep] = field(default_factory=list)

    @property
    def next_period(self) -> int | None:
        return self.steps[-1].start + 1 if self.steps else None

    @property
    def total_shed(self) -> float:
        return math.fsum(s.shed for s in self.steps)

    @property
    def total_cost(self) -> float:
        return math.fsum(s.cost for s in self.steps)

    def step_at(self, t: int) -> RollingStep:
        for s in self.steps:
            if s.start == t:
                return s
        raise KeyError(t)


def next_boundary(prev: RollingStep, generators: Sequence[Generator]) -> BoundaryCondition:
    """Boundary for the step after ``prev``: realized dispatch, decided commitments.

    Commitments already realized stay in the record; the previous window's
    decision for the new first period is fixed.  A slow unit whose startup
    trajectory is already under way keeps its scheduled commitment until it
    comes online.
    """
    sol = prev.solution
    t = prev.start + 1
    fixed = dict(prev.boundary.fixed_commitments)
    for g in generators:
        fixed[(g.id, prev.start)] = sol.x(g.id, prev.start)
        fixed[(g.id, t)] = sol.x(g.id, t)
        if g.is_slow:
            for s in sol.periods:
                if s > t and s - g.su_periods <= t and sol.y(g.id, s):
                    for tau in range(t, s + 1):
                        fixed[(g.id, tau)] = sol.x(g.id, tau)
    return BoundaryCondition(t, {g.id: prev.dispatch[g.id] for g in generators}, fixed)


def step(log: RollingLog, realized_nl: float, forecast: Sequence[float], study: Study,
         gap: float | None = None, backend: str | None = None) -> RollingLog:
    """Solve the next window and append it to ``log``.

    ``forecast`` holds the look-ahead values for t+1 .. t+L-1, or the full
    window if its length already equals the window length (first value then
    replaced by ``realized_nl``).
    """
    if realized_nl < 0:
        raise InvariantError("realized_nl", "must be non-negative")
    values = list(forecast)
    if len(values) == study.config.window_length:
        values = values[1:]
    if log.steps:
        bc = next_boundary(log.steps[-1], log.generators)
    else:
        bc = study.boundary
    t = bc.start_period
    nl = NetLoadForecast(tuple([realized_nl] + values), t, True)
    req = study_requirements(nl, study.config)
    m = build_uc(log.generators, nl, bc, study.config, req, log.formulation, allow_shedding=True)
    sol = solve_model(m, gap, backend)
    dispatch = {g.id: sol.p(g.id, t) for g in log.generators}
    injection = {g.id: sol.injection[(g.id, t)] for g in log.generators}
    log.steps.append(RollingStep(
        t, bc, nl, req, sol, float(realized_nl), dispatch, injection,
        sol.shed.get(t, 0.0), sol.spill.get(t, 0.0), sol.period_costs[t],
        audit_deliverable_frc(sol, log.generators, req),
    ))
    return log


def run(study: Study, realized: Sequence[float] | None = None,
        forecasts: Sequence[Sequence[float]] | None = None, formulation: str | None = None,
        gap: float | None = None, backend: str | None = None) -> RollingLog:
    """Roll the window over every row of the forecast matrix.

    Row i is the window seen at step i; its first entry is the realized net
    load unless ``realized[i]`` overrides it.
    """
    forecasts = [list(r) for r in (forecasts if forecasts is not None else study.config.rolling_forecasts)]
    if not forecasts:
        raise InvariantError("config.rolling_forecasts", "no forecast rows to roll over")
    if realized is None:
        realized = [row[0] for row in forecasts]
    if len(realized) != len(forecasts):
        raise InvariantError("realized", f"{len(realized)} values for {len(forecasts)} steps")
    log = RollingLog(formulation or study.config.formulation, tuple(study.generators))
    for r, row in zip(realized, forecasts):
        step(log, r, row[1:], study, gap, backend)
    return log


def sweep(study: Study, period: int, values: Sequence[float], formulation: str | None = None,
          gap: float | None = None, backend: str | None = None) -> list[RollingLog]:
    """Rolling runs that differ only in the realized net load at ``period``.

    Steps before ``period`` do not depend on the swept value, so they are
    solved once and shared.
    """
    forecasts = [list(r) for r in study.config.rolling_forecasts]
    base = [row[0] for row in forecasts]
    idx = period - study.boundary.start_period
    if not 0 <= idx < len(forecasts):
        raise InvariantError("period", f"{period} outside the rolling steps")
    prefix = RollingLog(formulation or study.config.formulation, tuple(study.generators))
    for r, row in zip(base[:idx], forecasts[:idx]):
        step(prefix, r, row[1:], study, gap, backend)
    logs = []
    for v in values:
        log = RollingLog(prefix.formulation, prefix.generators, list(prefix.steps))
        for i in range(idx, len(forecasts)):
            step(log, float(v) if i == idx else base[i], forecasts[i][1:], study, gap, backend)
        logs.append(log)
    return logs

