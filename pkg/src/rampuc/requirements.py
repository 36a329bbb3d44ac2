"""Upward/downward flexible-ramping requirements and the forecast-error adder."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .system import InvariantError, NetLoadForecast, StudyConfig


@dataclass(frozen=True)
class FrcRequirements:
    upward: tuple[float, ...]  # one entry per transition t -> t+1
    downward: tuple[float, ...]
    alpha: tuple[float, ...]

    def __post_init__(self):
        if len(self.upward) != len(self.downward):
            raise InvariantError("requirements", "upward and downward lengths differ")
        if any(v < 0 for v in self.upward + self.downward + self.alpha):
            raise InvariantError("requirements", "entries must be non-negative")


def compute_requirements(nl: NetLoadForecast | Sequence[float], alpha: Sequence[float] | float) -> FrcRequirements:
    """UFRC_t = max(NL_{t+1} - NL_t + a_t, 0), DFRC_t = max(NL_t - NL_{t+1} + a_t, 0).

    The first entry of ``nl`` is the realized current net load; the rest are
    forecasts.  ``alpha`` is indexed by transition, or a scalar.
    """
    values = nl.values if isinstance(nl, NetLoadForecast) else tuple(float(v) for v in nl)
    n = len(values) - 1
    if isinstance(alpha, (int, float)):
        alpha = [float(alpha)] * n
    alpha = [float(a) for a in alpha]
    if len(alpha) < n:
        raise InvariantError("alpha", f"need {n} entries, got {len(alpha)}")
    if any(a < 0 for a in alpha):
        raise InvariantError("alpha", "must be non-negative")
    up = tuple(max(values[t + 1] - values[t] + alpha[t], 0.0) for t in range(n))
    dn = tuple(max(values[t] - values[t + 1] + alpha[t], 0.0) for t in range(n))
    return FrcRequirements(up, dn, tuple(alpha[:n]))


def compute_alpha(demand_forecast: Sequence[float], installed_wind: float, k: float,
                  sigma_d_frac: float = 0.01, sigma_w_frac: float = 0.04) -> tuple[float, ...]:
    """k times the net-load error sigma, demand and wind errors combined in quadrature."""
    if sigma_d_frac < 0 or sigma_w_frac < 0 or k < 0:
        raise InvariantError("alpha", "multiplier and sigma fractions must be non-negative")
    sw = sigma_w_frac * installed_wind
    return tuple(k * math.hypot(sigma_d_frac * d, sw) for d in demand_forecast)


def error_sigma(forecast: NetLoadForecast, config: StudyConfig) -> tuple[float, ...]:
    """Per-period net-load forecast error standard deviation for a study."""
    if config.sigma_mw is not None:
        return (float(config.sigma_mw),) * len(forecast)
    demand = forecast.demand if forecast.demand is not None else forecast.values
    return compute_alpha(demand, config.installed_wind, 1.0, config.sigma_demand_frac, config.sigma_wind_frac)


def study_requirements(forecast: NetLoadForecast, config: StudyConfig, k: float | None = None) -> FrcRequirements:
    """Requirements for a window; the adder for t -> t+1 covers the error band of t+1."""
    k = config.alpha_multiplier if k is None else k
    sigma = error_sigma(forecast, config)
    return compute_requirements(forecast, [k * s for s in sigma[1:]])
