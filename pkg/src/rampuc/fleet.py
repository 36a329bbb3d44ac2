"""Seeded synthetic 54-unit slow-start fleet for the 118-bus day-ahead study.

Only the hourly demand and wind forecasts of that study are public; unit data
are not, so the fleet is drawn from four technology classes with plausible
cost, ramp and trajectory ranges.  The generator is deterministic for a given
seed and the bundled fixture ``ieee118_synthetic.json`` is its output for the
default seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import SLOW, BoundaryCondition, Generator, Study, StudyConfig, net_load

DEMAND_MW = (
    4920, 3960, 3480, 2400, 3000, 3600, 4200, 4680, 4920, 5280, 5340, 5040,
    4800, 4560, 5280, 5400, 5100, 5340, 5640, 5880, 6000, 5400, 5220, 4920,
)
WIND_MW = (
    300, 292.5, 307.5, 315, 285, 277.5, 285, 292.5, 262.5, 247.5, 255, 292.5,
    307.5, 322.5, 307.5, 285, 262.5, 240, 225, 217.5, 240, 255, 262.5, 247.5,
)
INSTALLED_WIND_MW = 0.5 * max(DEMAND_MW)
DEFAULT_SEED = 118


@dataclass(frozen=True)
class UnitClass:
    name: str
    count: int
    p_max: tuple[float, float]
    p_min_frac: tuple[float, float]
    ramp_frac: tuple[float, float]  # hourly ramp as a share of p_max
    linear_cost: tuple[float, float]
    no_load_cost: tuple[float, float]
    startup_cost: tuple[float, float]
    su_periods: int
    sd_periods: int
    min_up: int
    min_down: int


CLASSES = (
    UnitClass("steam-large", 10, (300, 420), (0.40, 0.50), (0.25, 0.35), (12, 18), (800, 1200), (8000, 12000), 3, 2, 8, 6),
    UnitClass("steam-mid", 16, (150, 250), (0.35, 0.45), (0.35, 0.50), (18, 26), (400, 700), (3000, 5000), 2, 2, 5, 4),
    UnitClass("combined-cycle", 16, (100, 200), (0.30, 0.40), (0.60, 0.80), (26, 34), (300, 500), (1500, 2500), 2, 1, 3, 3),
    UnitClass("peaker", 12, (40, 100), (0.20, 0.30), (0.90, 1.00), (38, 55), (100, 200), (300, 700), 1, 1, 1, 2),
)


def _r(v: float, step: float = 0.5) -> float:
    return float(round(v / step) * step)


def synthetic_fleet(seed: int = DEFAULT_SEED) -> tuple[Generator, ...]:
    """54 slow-start units; trajectories ramp linearly to and from p_min."""
    rng = np.random.default_rng(seed)
    units = []
    for cls in CLASSES:
        for i in range(cls.count):
            u = lambda lo_hi: rng.uniform(*lo_hi)
            p_max = _r(u(cls.p_max), 5.0)
            p_min = _r(p_max * u(cls.p_min_frac), 5.0)
            ramp = _r(min(p_max * u(cls.ramp_frac), p_max))
            # startup/shutdown ramp lets a unit join or leave at minimum output
            su_ramp = _r(min(max(p_min, ramp), p_max))
            su = tuple(_r(p_min * k / (cls.su_periods + 1)) for k in range(1, cls.su_periods + 1))
            sd = tuple(_r(p_min * (cls.sd_periods + 1 - k) / (cls.sd_periods + 1)) for k in range(1, cls.sd_periods + 1))
            units.append(Generator(
                id=f"{cls.name}-{i + 1:02d}",
                kind=SLOW,
                no_load_cost=_r(u(cls.no_load_cost), 10.0),
                linear_cost=_r(u(cls.linear_cost), 0.01),
                startup_cost=_r(u(cls.startup_cost), 10.0),
                p_max=p_max,
                p_min=p_min,
                ramp_rate=ramp,
                startup_ramp=su_ramp,
                shutdown_ramp=su_ramp,
                startup_trajectory=su,
                shutdown_trajectory=sd,
                min_up=cls.min_up,
                min_down=cls.min_down,
            ))
    return tuple(units)


def initial_state(generators, load: float, margin: float = 0.15) -> BoundaryCondition:
    """Merit-order commitment covering ``load`` plus a margin, dispatched economically.

    Units are ranked by full-load average cost; the committed set is the
    shortest prefix whose capacity reaches ``(1 + margin) * load``.  The prior
    period is taken as steady state, so minimum up/down history is satisfied.
    """
    order = sorted(generators, key=lambda g: (g.linear_cost + g.no_load_cost / g.p_max, g.id))
    on, cap = [], 0.0
    for g in order:
        if cap >= (1 + margin) * load:
            break
        on.append(g)
        cap += g.p_max
    power = {g.id: 0.0 for g in generators}
    rest = load - sum(g.p_min for g in on)
    for g in on:
        power[g.id] = g.p_min
    for g in sorted(on, key=lambda g: (g.linear_cost, g.id)):
        add = min(g.p_max - g.p_min, max(rest, 0.0))
        power[g.id] += add
        rest -= add
    ids = {g.id for g in on}
    fixed = {(g.id, 0): int(g.id in ids) for g in generators}
    return BoundaryCondition(1, power, fixed)


def ieee118_study(seed: int = DEFAULT_SEED, k: float = 3.0) -> Study:
    gens = synthetic_fleet(seed)
    forecast = net_load(DEMAND_MW, WIND_MW, 1, realized_first=False)
    cfg = StudyConfig(horizon=24, period_minutes=60, voll=9000.0, alpha_multiplier=k, mip_gap=1e-3,
                      installed_wind=INSTALLED_WIND_MW, window_length=24)
    return Study(gens, forecast, initial_state(gens, forecast.values[0]), cfg)
