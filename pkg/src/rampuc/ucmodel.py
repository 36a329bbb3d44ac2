"""Unit-commitment window model with flexible ramping capability (FRC).

A window covers consecutive periods ``t0 .. t0+T-1``.  Period ``t0-1`` is
boundary: its dispatch and commitment are constants taken from the
BoundaryCondition, as are commitment bits the boundary fixes inside the window.

Two formulations share one builder:

* conventional: base model + per-unit FRC bounds + system requirements
  ``sum ur >= UFRC``, ``sum dr >= DFRC``;
* proposed: additionally tracks each unit's negative contribution when it is
  scheduled to shut down (nur) or start up (ndr), including the fixed
  trajectory steps of slow-start units, and nets them out of the
  requirement rows.

FRC quantities exist only for transitions t -> t+1 inside the window; the
last period's FRC variables are pinned to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import milp
from .milp import EQ, GE, LE, LinExpr, MilpProblem, SolveResult, var
from .requirements import FrcRequirements
from .system import (
    CONVENTIONAL,
    FAST,
    MUST_RUN,
    PROPOSED,
    BoundaryCondition,
    Generator,
    InvariantError,
    NetLoadForecast,
    StudyConfig,
)

INT_TOL = 1e-6


class InfeasibleModelError(RuntimeError):
    pass


class GapLimitError(RuntimeError):
    pass


@dataclass
class UcModel:
    problem: MilpProblem
    generators: tuple[Generator, ...]
    forecast: NetLoadForecast
    boundary: BoundaryCondition
    config: StudyConfig
    periods: list[int]
    index: dict[tuple[str, str, int], int] = field(default_factory=dict)
    shed: dict[int, int] = field(default_factory=dict)
    spill: dict[int, int] = field(default_factory=dict)
    balance: dict[int, LinExpr] = field(default_factory=dict)
    requirements: FrcRequirements | None = None
    formulation: str = CONVENTIONAL
    has_trajectories: bool = False

    @property
    def t0(self) -> int:
        return self.periods[0]

    @property
    def last(self) -> int:
        return self.periods[-1]

    def in_window(self, t: int) -> bool:
        return self.t0 <= t <= self.last

    def v(self, kind: str, gid: str, t: int) -> LinExpr:
        return var(self.index[(kind, gid, t)])

    def has(self, kind: str, gid: str, t: int) -> bool:
        return (kind, gid, t) in self.index

    def _new(self, kind: str, gid: str, t: int, lb: float, ub: float, binary: bool = False) -> int:
        j = self.problem.add_var(f"{kind}_{gid}_{t}", lb, ub, binary)
        self.index[(kind, gid, t)] = j
        return j

    # commitment-state expressions over window, history and future ---------
    def hist_x(self, gid: str, t: int) -> int:
        return self.boundary.history(gid, t)

    def X(self, g: Generator, t: int):
        if self.in_window(t):
            return self.v("x", g.id, t)
        if t < self.t0:
            return LinExpr(const=self.hist_x(g.id, t))
        raise KeyError(t)

    def P(self, g: Generator, t: int):
        if self.in_window(t):
            return self.v("p", g.id, t)
        if t == self.t0 - 1:
            return LinExpr(const=self.boundary.initial_power[g.id])
        raise KeyError(t)

    def Y(self, g: Generator, t: int):
        """Startup indicator; past values from history, beyond the window zero."""
        if self.in_window(t):
            return self.v("y", g.id, t)
        if t > self.last:
            return LinExpr()
        return LinExpr(const=int(self.hist_x(g.id, t) == 1 and self.hist_x(g.id, t - 1) == 0))

    def Z(self, g: Generator, t: int):
        if self.in_window(t):
            return self.v("z", g.id, t)
        if t > self.last:
            return LinExpr()
        return LinExpr(const=int(self.hist_x(g.id, t) == 0 and self.hist_x(g.id, t - 1) == 1))

    def add(self, name: str, lhs, sense: str, rhs=0.0) -> None:
        self.problem.add_constraint(name, lhs, sense, rhs)


# ---------------------------------------------------------------------------
def build_base_uc(generators, nl: NetLoadForecast, bc: BoundaryCondition, cfg: StudyConfig,
                  allow_shedding: bool = False) -> UcModel:
    """Cost objective, power balance, unit limits, ramping and commitment logic."""
    generators = tuple(generators)
    bc.validate(generators)
    if nl.start_period != bc.start_period:
        raise InvariantError("boundary.start_period",
                             f"window starts at {nl.start_period}, boundary at {bc.start_period}")
    periods = list(nl.periods)
    m = UcModel(MilpProblem(f"uc_t{periods[0]}"), generators, nl, bc, cfg, periods)
    t0, last = m.t0, m.last

    for g in generators:
        for t in periods:
            m._new("p", g.id, t, 0.0, g.p_max)
            m._new("pbar", g.id, t, 0.0, g.p_max)
            xf = 1 if g.kind == MUST_RUN else bc.commitment(g.id, t)
            if xf is None:
                m._new("x", g.id, t, 0, 1, binary=True)
            else:
                m._new("x", g.id, t, xf, xf, binary=True)
            m._new("y", g.id, t, 0, 1, binary=True)
            m._new("z", g.id, t, 0, 1, binary=True)
        # fix y/z where both adjacent commitments are already known
        for t in periods:
            prev = 1 if g.kind == MUST_RUN else (bc.history(g.id, t - 1) if t == t0 else bc.commitment(g.id, t - 1))
            cur = 1 if g.kind == MUST_RUN else bc.commitment(g.id, t)
            jy, jz = m.index[("y", g.id, t)], m.index[("z", g.id, t)]
            if prev is not None and cur is not None:
                m.problem.set_bounds(jy, max(cur - prev, 0), max(cur - prev, 0))
                m.problem.set_bounds(jz, max(prev - cur, 0), max(prev - cur, 0))
            elif g.is_slow and t - g.su_periods < t0:
                # the startup trajectory would have had to begin before the window
                m.problem.set_bounds(jy, 0, 0)

    for t in periods:
        expr = LinExpr()
        for g in generators:
            expr = expr + m.v("p", g.id, t)
        if allow_shedding:
            m.shed[t] = m.problem.add_var(f"shed_{t}", 0.0, math.inf)
            m.spill[t] = m.problem.add_var(f"spill_{t}", 0.0, math.inf)
            expr = expr + var(m.shed[t]) - var(m.spill[t])
        m.balance[t] = expr
        m.add(f"balance_{t}", expr, EQ, nl.values[t - t0])

    for g in generators:
        gid = g.id
        for t in periods:
            p, pb, x = m.v("p", gid, t), m.v("pbar", gid, t), m.v("x", gid, t)
            m.problem.add_objective(g.no_load_cost * x + g.linear_cost * p + g.startup_cost * m.v("y", gid, t))
            m.add(f"pmin_{gid}_{t}", g.p_min * x, LE, p)
            m.add(f"pavail_{gid}_{t}", p, LE, pb)
            m.add(f"pmax_{gid}_{t}", pb, LE, g.p_max * x)
            xp, pp = m.X(g, t - 1), m.P(g, t - 1)
            m.add(f"rampup_{gid}_{t}", pb, LE,
                  pp + g.ramp_rate * xp + g.startup_ramp * (x - xp) + g.p_max * (1 - x))
            if t < last:
                xn = m.v("x", gid, t + 1)
                m.add(f"sdcap_{gid}_{t}", pb, LE, g.shutdown_ramp * (x - xn) + g.p_max * xn)
            m.add(f"rampdn_{gid}_{t}", pp - p, LE,
                  g.ramp_rate * x + g.shutdown_ramp * (xp - x) + g.p_max * (1 - xp))
            m.add(f"logic_{gid}_{t}", x - xp, EQ, m.v("y", gid, t) - m.v("z", gid, t))
            # without this a slow unit could flag both and collect free trajectory energy
            m.add(f"onoff_{gid}_{t}", m.v("y", gid, t) + m.v("z", gid, t), LE, 1)
    if allow_shedding:
        for t in periods:
            m.problem.add_objective(cfg.voll * (var(m.shed[t]) + var(m.spill[t])))
    return m


def add_frc_constraints_conventional(m: UcModel, req: FrcRequirements) -> UcModel:
    """Per-unit FRC capability bounds and the system requirement rows."""
    if len(req.upward) < len(m.periods) - 1:
        raise InvariantError("requirements", f"need {len(m.periods) - 1} transitions, got {len(req.upward)}")
    m.requirements = req
    for g in m.generators:
        for t in m.periods:
            b = g.p_max if t < m.last else 0.0
            m._new("ur", g.id, t, -b, b)
            m._new("dr", g.id, t, -b, b)
    for g in m.generators:
        gid = g.id
        Pmin, Pmax, RR, RSU, RSD = g.p_min, g.p_max, g.ramp_rate, g.startup_ramp, g.shutdown_ramp
        for t in m.periods[:-1]:
            x, xn = m.v("x", gid, t), m.v("x", gid, t + 1)
            p, pbn = m.v("p", gid, t), m.v("pbar", gid, t + 1)
            ur, dr = m.v("ur", gid, t), m.v("dr", gid, t)
            both = Pmin * (x + xn - 1)
            cap = pbn + Pmax * (1 - xn)
            m.add(f"urlo_{gid}_{t}", both, LE, ur + p)
            m.add(f"urhi_{gid}_{t}", ur + p, LE, cap)
            m.add(f"drlo_{gid}_{t}", both, LE, p - dr)
            m.add(f"drhi_{gid}_{t}", p - dr, LE, cap)
            up_lim = RR * x + RSU * (xn - x) + Pmax * (1 - xn)
            dn_lim = RR * xn + RSD * (x - xn) + Pmax * (1 - x)
            m.add(f"urramplo_{gid}_{t}", -1 * dn_lim, LE, ur)
            m.add(f"urramphi_{gid}_{t}", ur, LE, up_lim)
            m.add(f"drramplo_{gid}_{t}", -1 * up_lim, LE, dr)
            m.add(f"drramphi_{gid}_{t}", dr, LE, dn_lim)
            m.add(f"urcaplo_{gid}_{t}", -Pmax * x + Pmin * xn, LE, ur)
            m.add(f"urcaphi_{gid}_{t}", ur, LE, Pmax * xn)
            m.add(f"drcaplo_{gid}_{t}", -Pmax * xn, LE, dr)
            m.add(f"drcaphi_{gid}_{t}", dr, LE, Pmax * x - Pmin * xn)
    for i, t in enumerate(m.periods[:-1]):
        m.add(f"req_up_{t}", sum((m.v("ur", g.id, t) for g in m.generators), LinExpr()), GE, req.upward[i])
        m.add(f"req_dn_{t}", sum((m.v("dr", g.id, t) for g in m.generators), LinExpr()), GE, req.downward[i])
    return m


def add_trajectory_balance(m: UcModel) -> UcModel:
    """Add startup/shutdown trajectory injections of slow-start units to the balance.

    A startup flagged at period s (first period above minimum) injects
    P^SU_k in period s - SU + k - 1; a shutdown flagged at s injects P^SD_k in
    period s + k - 1.  Flags before the window come from boundary history;
    flags beyond it are taken as zero.
    """
    slow = [g for g in m.generators if g.is_slow]
    m.has_trajectories = bool(slow)
    for t in m.periods:
        expr = m.balance[t]
        for g in slow:
            expr = expr + trajectory_injection(m, g, t)
        m.balance[t] = expr
        m.problem.replace_constraint(f"balance_{t}", expr, EQ, m.forecast.values[t - m.t0])
    return m


def trajectory_injection(m: UcModel, g: Generator, t: int) -> LinExpr:
    expr = LinExpr()
    su = g.su_periods
    for k, pk in enumerate(g.startup_trajectory, 1):
        expr = expr + pk * m.Y(g, t - k + su + 1)
    for k, pk in enumerate(g.shutdown_trajectory, 1):
        expr = expr + pk * m.Z(g, t - k + 1)
    return expr


def add_negative_frc_fast(m: UcModel) -> UcModel:
    """Negative FRC of fast-start units scheduled to switch at t+1.

    A unit shutting down at t+1 removes its whole output p_t from upward
    capability; a unit starting at t+1 adds its output p_{t+1} against
    downward capability.
    """
    for g in m.generators:
        if g.kind != FAST:
            continue
        gid, Pmin, Pmax = g.id, g.p_min, g.p_max
        for t in m.periods:
            b = Pmax if t < m.last else 0.0
            m._new("nur", gid, t, 0.0, b)
            m._new("ndr", gid, t, 0.0, b)
            m._new("dsd", gid, t, 0.0, b)
            m._new("dsu", gid, t, 0.0, b)
        for t in m.periods[:-1]:
            nur, ndr = m.v("nur", gid, t), m.v("ndr", gid, t)
            dsd, dsu = m.v("dsd", gid, t), m.v("dsu", gid, t)
            zn, yn = m.v("z", gid, t + 1), m.v("y", gid, t + 1)
            m.add(f"nursplit_{gid}_{t}", m.v("p", gid, t), EQ, nur + dsd)
            m.add(f"nurlo_{gid}_{t}", Pmin * zn, LE, nur)
            m.add(f"nurhi_{gid}_{t}", nur, LE, Pmax * zn)
            m.add(f"dsdhi_{gid}_{t}", dsd, LE, Pmax * (1 - zn))
            m.add(f"ndrsplit_{gid}_{t}", m.v("p", gid, t + 1), EQ, ndr + dsu)
            m.add(f"ndrlo_{gid}_{t}", Pmin * yn, LE, ndr)
            m.add(f"ndrhi_{gid}_{t}", ndr, LE, Pmax * yn)
            m.add(f"dsuhi_{gid}_{t}", dsu, LE, Pmax * (1 - yn))
    return m


def add_negative_frc_slow(m: UcModel) -> UcModel:
    """Negative FRC of slow-start units, including their fixed trajectory steps."""
    for g in m.generators:
        if not g.is_slow:
            continue
        gid, Pmin, Pmax = g.id, g.p_min, g.p_max
        sd1 = g.shutdown_trajectory[0]
        sul = g.startup_trajectory[-1]
        for t in m.periods:
            live = t < m.last
            m._new("nur", gid, t, 0.0, Pmax - sd1 if live else 0.0)
            m._new("ndr", gid, t, 0.0, Pmax - sul if live else 0.0)
            # auxiliaries carry the printed offset: dsd + P^SD1 >= 0
            m._new("dsd", gid, t, -sd1 if live else 0.0, Pmax - sd1 if live else 0.0)
            m._new("dsu", gid, t, -sul if live else 0.0, Pmax - sul if live else 0.0)
            m._new("nursd", gid, t, 0.0, sd1 if live else 0.0)
            m._new("ndrsu", gid, t, 0.0, sul if live else 0.0)
        sd = list(g.shutdown_trajectory) + [0.0]
        su = [0.0] + list(g.startup_trajectory)
        for t in m.periods[:-1]:
            x, xn = m.v("x", gid, t), m.v("x", gid, t + 1)
            nur, ndr = m.v("nur", gid, t), m.v("ndr", gid, t)
            dsd, dsu = m.v("dsd", gid, t), m.v("dsu", gid, t)
            zn, yn = m.v("z", gid, t + 1), m.v("y", gid, t + 1)
            m.add(f"nursplit_{gid}_{t}", m.v("p", gid, t) - sd1 * x, EQ, nur + dsd + sd1)
            m.add(f"nurlo_{gid}_{t}", (Pmin - sd1) * zn, LE, nur)
            m.add(f"nurhi_{gid}_{t}", nur, LE, (Pmax - sd1) * zn)
            m.add(f"dsdhi_{gid}_{t}", dsd + sd1, LE, Pmax * (1 - zn))
            steps = LinExpr()
            for k in range(1, g.sd_periods + 1):
                steps = steps + (sd[k - 1] - sd[k]) * m.Z(g, t - k + 1)
            m.add(f"nursd_{gid}_{t}", m.v("nursd", gid, t), EQ, steps)
            m.add(f"ndrsplit_{gid}_{t}", m.v("p", gid, t + 1) - sul * xn, EQ, ndr + dsu + sul)
            m.add(f"ndrlo_{gid}_{t}", (Pmin - sul) * yn, LE, ndr)
            m.add(f"ndrhi_{gid}_{t}", ndr, LE, (Pmax - sul) * yn)
            m.add(f"dsuhi_{gid}_{t}", dsu + sul, LE, Pmax * (1 - yn))
            steps = LinExpr()
            n_su = g.su_periods
            for i in range(n_su):
                steps = steps + (su[n_su - i] - su[n_su - i - 1]) * m.Y(g, t + 2 + i)
            m.add(f"ndrsu_{gid}_{t}", m.v("ndrsu", gid, t), EQ, steps)
    return m


def add_requirements_proposed(m: UcModel, req: FrcRequirements | None = None) -> UcModel:
    """Replace the requirement rows by their negative-FRC-netted versions."""
    req = req or m.requirements
    m.formulation = PROPOSED
    for i, t in enumerate(m.periods[:-1]):
        up, dn = LinExpr(), LinExpr()
        for g in m.generators:
            up = up + m.v("ur", g.id, t)
            dn = dn + m.v("dr", g.id, t)
            if m.has("nur", g.id, t):
                up = up - m.v("nur", g.id, t)
                dn = dn - m.v("ndr", g.id, t)
            if m.has("nursd", g.id, t):
                up = up - m.v("nursd", g.id, t)
                dn = dn - m.v("ndrsu", g.id, t)
        m.problem.replace_constraint(f"req_up_{t}", up, GE, req.upward[i])
        m.problem.replace_constraint(f"req_dn_{t}", dn, GE, req.downward[i])
    return m


def add_min_up_down(m: UcModel) -> UcModel:
    """Minimum up/down times in startup/shutdown-indicator form, honouring history."""
    for g in m.generators:
        if g.kind == MUST_RUN:
            continue
        for t in m.periods:
            for kind, length, ind, rhs in (
                ("minup", g.min_up, m.Y, m.X(g, t)),
                ("mindn", g.min_down, m.Z, 1 - m.X(g, t)),
            ):
                if length <= 1:
                    continue
                lhs = LinExpr()
                for tau in range(t - length + 1, t + 1):
                    lhs = lhs + ind(g, tau)
                diff = lhs - rhs
                if not diff.terms:
                    if diff.const > 1e-9:
                        raise InvariantError(f"boundary.commitments.{g.id}",
                                             f"history violates {kind} time {length} at period {t}")
                    continue
                m.add(f"{kind}_{g.id}_{t}", lhs, LE, rhs)
    return m


def build_uc(generators, nl: NetLoadForecast, bc: BoundaryCondition, cfg: StudyConfig,
             req: FrcRequirements, formulation: str | None = None, allow_shedding: bool = False) -> UcModel:
    """Assemble the full window model for either formulation."""
    formulation = formulation or cfg.formulation
    m = build_base_uc(generators, nl, bc, cfg, allow_shedding)
    if any(g.is_slow for g in m.generators):
        add_trajectory_balance(m)
    add_frc_constraints_conventional(m, req)
    if formulation == PROPOSED:
        add_negative_frc_fast(m)
        add_negative_frc_slow(m)
        add_requirements_proposed(m, req)
    add_min_up_down(m)
    return m


# ---------------------------------------------------------------------------
@dataclass
class UcSolution:
    status: str
    objective: float
    gap: float
    periods: list[int]
    generator_ids: list[str]
    values: dict[tuple[str, str, int], float]
    shed: dict[int, float]
    spill: dict[int, float]
    injection: dict[tuple[str, int], float]
    period_costs: dict[int, float]
    requirements: FrcRequirements | None
    formulation: str
    node_count: int = 0
    raw: SolveResult | None = field(default=None, repr=False)
    problem: MilpProblem | None = field(default=None, repr=False)  # for feasibility re-checks

    def get(self, kind: str, gid: str, t: int, default: float = 0.0) -> float:
        return self.values.get((kind, gid, t), default)

    def x(self, gid, t) -> int:
        return int(round(self.values[("x", gid, t)]))

    def y(self, gid, t) -> int:
        return int(round(self.values[("y", gid, t)]))

    def z(self, gid, t) -> int:
        return int(round(self.values[("z", gid, t)]))

    def p(self, gid, t) -> float:
        return self.values[("p", gid, t)]

    def commitment(self, gid: str) -> list[int]:
        return [self.x(gid, t) for t in self.periods]

    def dispatch(self, gid: str) -> list[float]:
        return [self.p(gid, t) for t in self.periods]

    def total(self, kind: str, t: int) -> float:
        return math.fsum(self.values.get((kind, g, t), 0.0) for g in self.generator_ids)


def extract_solution(m: UcModel, raw: SolveResult) -> UcSolution:
    """Typed solution with per-period costs; raises on infeasible or unbounded."""
    if raw.status in (milp.INFEASIBLE, milp.UNBOUNDED) or raw.x is None:
        raise InfeasibleModelError(f"window starting {m.t0}: solver status {raw.status}")
    xv = raw.x
    values = {key: float(xv[j]) for key, j in m.index.items()}
    for key, j in m.index.items():
        if key[0] in ("x", "y", "z"):
            if abs(values[key] - round(values[key])) > INT_TOL:
                raise RuntimeError(f"binary {key} not integral: {values[key]}")
            values[key] = float(round(values[key]))
    shed = {t: float(xv[j]) for t, j in m.shed.items()}
    spill = {t: float(xv[j]) for t, j in m.spill.items()}
    injection = {}
    for g in m.generators:
        for t in m.periods:
            inj = trajectory_injection(m, g, t) if g.is_slow else LinExpr()
            injection[(g.id, t)] = inj.const + math.fsum(c * xv[k] for k, c in inj.terms.items())
    costs = {}
    for t in m.periods:
        parts = []
        for g in m.generators:
            parts += [g.no_load_cost * values[("x", g.id, t)], g.linear_cost * values[("p", g.id, t)],
                      g.startup_cost * values[("y", g.id, t)]]
        parts.append(m.config.voll * (shed.get(t, 0.0) + spill.get(t, 0.0)))
        costs[t] = math.fsum(parts)
    return UcSolution(raw.status, float(raw.objective), float(raw.gap), list(m.periods),
                      [g.id for g in m.generators], values, shed, spill, injection, costs,
                      m.requirements, m.formulation, raw.node_count, raw, m.problem)


def solve_model(m: UcModel, gap: float | None = None, backend: str | None = None,
                allow_gap_limit: bool = True, **kw) -> UcSolution:
    gap = m.config.mip_gap if gap is None else gap
    backend = backend or m.config.backend
    raw = milp.solve(m.problem, gap, backend, **kw)
    if raw.status == milp.GAP_LIMIT and raw.x is None:
        raise GapLimitError(f"window starting {m.t0}: no incumbent within budget")
    if raw.status == milp.GAP_LIMIT and not allow_gap_limit:
        raise GapLimitError(f"window starting {m.t0}: gap {raw.gap:.4g} above target {gap}")
    return extract_solution(m, raw)
