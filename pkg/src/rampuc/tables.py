"""Delimited text renderings of solutions, audits and rolling logs.

Every number goes through ``fmt`` so that output is byte-stable across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .rolling import FrcAudit, RollingLog
from .system import Generator
from .ucmodel import UcSolution

PRODUCTS = (
    ("x", "on/off"),
    ("p", "power"),
    ("ur", "up ramp"),
    ("dr", "dn ramp"),
)
NEGATIVE = (("nur", "neg up ramp"), ("ndr", "neg dn ramp"), ("nursd", "neg up trajectory"),
            ("ndrsu", "neg dn trajectory"))


def fmt(v) -> str:
    """Fixed 6 decimals, integers verbatim, no negative zero."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        s = f"{v:.6f}"
        return "0.000000" if s == "-0.000000" else s
    return str(v)


def clean(v: float, digits: int = 9) -> float:
    """Round away solver noise for structured reports."""
    r = round(float(v), digits)
    return 0.0 if r == 0 else r


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def solution_csv(sol: UcSolution, generators: list[Generator]) -> str:
    """Unit-by-product rows over window periods; FRC cells of the last period are '-'."""
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["generator", "product"] + [f"t={t}" for t in sol.periods])
    last = sol.periods[-1]
    for g in generators:
        products = list(PRODUCTS)
        products += [p for p in NEGATIVE if (p[0], g.id, sol.periods[0]) in sol.values]
        for key, label in products:
            row = [g.id, label]
            for t in sol.periods:
                if key == "x":
                    row.append(str(sol.x(g.id, t)))
                elif key != "p" and t == last:
                    row.append("-")
                else:
                    row.append(fmt(sol.get(key, g.id, t)))
            w.writerow(row)
    if sol.shed:
        w.writerow(["system", "load shedding"] + [fmt(sol.shed[t]) for t in sol.periods])
    w.writerow(["system", "operating cost [k$]"] + [fmt(sol.period_costs[t] / 1e3) for t in sol.periods])
    w.writerow(["system", "objective [$]", fmt(sol.objective)] + [""] * (len(sol.periods) - 1))
    return buf.getvalue()


def audit_csv(audit: FrcAudit) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    rows = audit.rows()
    keys = list(rows[0]) if rows else ["period"]
    w.writerow(keys)
    for r in rows:
        w.writerow([fmt(r[k]) for k in keys])
    return buf.getvalue()


def rolling_csv(log: RollingLog) -> str:
    """Realized record of each step: dispatch per unit, shed, net load, period cost."""
    buf = io.StringIO()
    w = _writer(buf)
    ids = [g.id for g in log.generators]
    w.writerow(["period", "formulation"] + [f"p_{g}" for g in ids] + ["injection", "shed", "net_load", "cost"])
    for s in log.steps:
        w.writerow([s.start, log.formulation] + [fmt(s.dispatch[g]) for g in ids]
                   + [fmt(math.fsum(s.injection.values())), fmt(s.shed), fmt(s.realized_nl), fmt(s.cost)])
    w.writerow(["total", log.formulation] + [""] * len(ids) + ["", fmt(log.total_shed), "", fmt(log.total_cost)])
    return buf.getvalue()


def window_power_csv(log: RollingLog) -> str:
    """Each step's window: power per unit and period, shed, net load, period cost."""
    buf = io.StringIO()
    w = _writer(buf)
    for s in log.steps:
        sol = s.solution
        w.writerow([f"window t={s.start}", "product"] + [f"t={t}" for t in sol.periods])
        for g in log.generators:
            w.writerow([g.id, "power"] + [fmt(sol.p(g.id, t)) for t in sol.periods])
        w.writerow(["system", "load shedding"] + [fmt(sol.shed.get(t, 0.0)) for t in sol.periods])
        w.writerow(["system", "net load"] + [fmt(v) for v in s.forecast.values])
        w.writerow(["system", "operating cost [k$]"] + [fmt(sol.period_costs[t] / 1e3) for t in sol.periods])
        w.writerow([])
    return buf.getvalue()


def log_document(log: RollingLog) -> dict:
    """Structured rolling record; see docs/study-format.md for the field list."""
    steps = []
    for s in log.steps:
        sol = s.solution
        steps.append({
            "start": s.start,
            "boundary": {
                "initial_power": {k: clean(v) for k, v in sorted(s.boundary.initial_power.items())},
                "commitments": {f"{g}@{t}": v for (g, t), v in sorted(s.boundary.fixed_commitments.items())},
            },
            "forecast": [clean(v) for v in s.forecast.values],
            "requirements": {"upward": [clean(v) for v in s.requirements.upward],
                             "downward": [clean(v) for v in s.requirements.downward]},
            "realized_net_load": clean(s.realized_nl),
            "dispatch": {k: clean(v) for k, v in s.dispatch.items()},
            "shed": clean(s.shed),
            "spill": clean(s.spill),
            "cost": clean(s.cost),
            "window": {
                "status": sol.status,
                "objective": clean(sol.objective),
                "commitment": {g.id: sol.commitment(g.id) for g in log.generators},
                "power": {g.id: [clean(v) for v in sol.dispatch(g.id)] for g in log.generators},
                "period_costs": [clean(sol.period_costs[t]) for t in sol.periods],
            },
            "audit": [{k: (clean(v) if isinstance(v, float) else v) for k, v in r.items()} for r in s.audit.rows()],
        })
    return {"formulation": log.formulation, "total_shed": clean(log.total_shed),
            "total_cost": clean(log.total_cost), "steps": steps}


def log_json(log: RollingLog) -> str:
    return json.dumps(log_document(log), indent=1, sort_keys=True) + "\n"
