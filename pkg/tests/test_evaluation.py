import dataclasses
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from rampuc import evaluation
from rampuc.evaluation import evaluate_schedule, generate_scenarios, grid_scenarios, run_comparison
from rampuc.system import InvariantError, NetLoadForecast, net_load, toy_study

from .conftest import toy_window

GRID = list(range(610, 671, 5))
FULL = 3  # look-ahead covering the rest of a four-period window


def _evaluate(formulation, nl3, lookahead=0):
    m, sol = toy_window(formulation, 2)
    fc = list(m.forecast.values)
    row = [fc[0], float(nl3)] + fc[2:]
    return evaluate_schedule(sol, row, toy_study().generators, m.boundary, 9000.0, 0.25, lookahead, fc)


@pytest.mark.parametrize("formulation", ["conventional", "proposed"])
def test_central_scenario_sheds_nothing(formulation):
    m, sol = toy_window(formulation, 2)
    r = _evaluate(formulation, m.forecast.values[1])
    assert sum(r.shed) == 0.0
    # re-dispatch drops the FRC rows, so it can only be cheaper than the schedule
    assert r.generation_cost <= sol.objective + 1e-6


def test_central_scenario_reproduces_conventional_cost():
    _, sol = toy_window("conventional", 2)
    assert _evaluate("conventional", 640.0).generation_cost == pytest.approx(sol.objective)


def test_plus_25_at_t3():
    conv = _evaluate("conventional", 665.0)
    assert conv.shed[1] == pytest.approx(15.0, abs=1e-6)
    assert conv.shed_mwh == pytest.approx(15.0 * 0.25, abs=1e-6)
    assert conv.shed_cost == pytest.approx(15.0 * 9000, rel=1e-9)
    assert sum(_evaluate("proposed", 665.0).shed) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("nl3", GRID)
def test_in_bounds_reliability_with_lookahead(nl3):
    assert sum(_evaluate("proposed", nl3, FULL).shed) == pytest.approx(0.0, abs=1e-6)


def test_conventional_sheds_inside_band():
    shed = {v: sum(_evaluate("conventional", v, FULL).shed) for v in GRID}
    assert {v for v, s in shed.items() if s > 1e-6} == {655, 660, 665, 670}


def test_myopic_redispatch_characterization():
    # single-period re-dispatch positions the proposed fleet for the realized
    # period only and then cannot follow the scheduled ramp at t=4
    shed = {v: round(sum(_evaluate("proposed", v, 0).shed), 6) for v in GRID}
    assert {v: s for v, s in shed.items() if s} == {610: 10.0, 615: 10.0, 620: 10.0, 625: 5.0}


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(st.floats(-30, 30), min_size=3, max_size=3), st.floats(0, 1),
       st.sampled_from(["conventional", "proposed"]))
def test_shrinking_errors_never_increases_shedding(errors, scale, formulation):
    m, sol = toy_window(formulation, 2)
    fc = list(m.forecast.values)
    gens = toy_study().generators
    big = [fc[0]] + [f + e for f, e in zip(fc[1:], errors)]
    small = [fc[0]] + [f + scale * e for f, e in zip(fc[1:], errors)]
    a = evaluate_schedule(sol, big, gens, m.boundary, 9000.0, 0.25, FULL, fc)
    b = evaluate_schedule(sol, small, gens, m.boundary, 9000.0, 0.25, FULL, fc)
    assert b.shed_mwh <= a.shed_mwh + 1e-6


def test_scenarios_are_seeded_and_keep_realized_period():
    fc = net_load([1000, 1100, 1200], [100, 120, 90])
    a = generate_scenarios(fc, 500, 20, seed=4)
    b = generate_scenarios(fc, 500, 20, seed=4)
    assert np.array_equal(a.net_load, b.net_load)
    assert np.all(a.net_load[:, 0] == fc.values[0])
    assert not np.array_equal(a.net_load, generate_scenarios(fc, 500, 20, seed=5).net_load)
    with pytest.raises(InvariantError):
        generate_scenarios(fc, 500, 0, seed=1)


def test_scenario_error_scale():
    fc = NetLoadForecast((4000.0,) * 3, 1, False, (4000.0,) * 3, (0.0,) * 3)
    s = generate_scenarios(fc, 3000, 20_000, seed=0)
    assert np.std(s.demand_error[:, 1]) == pytest.approx(40.0, rel=0.03)
    assert np.std(s.wind_error[:, 1]) == pytest.approx(120.0, rel=0.03)


def test_grid_scenarios_replace_one_period():
    fc = NetLoadForecast((1.0, 2.0, 3.0), 1)
    g = grid_scenarios(fc, 2, [5.0, 6.0])
    assert g.net_load.tolist() == [[1.0, 5.0, 3.0], [1.0, 6.0, 3.0]]
    with pytest.raises(InvariantError):
        grid_scenarios(fc, 7, [1.0])


def test_toy_comparison_on_grid():
    study = toy_study()
    sc = grid_scenarios(study.forecast, 3, GRID)
    cmp = run_comparison(study, [1.0], scenarios=sc, lookahead=FULL)
    assert cmp[1.0]["proposed"].shed_events == 0
    assert cmp[1.0]["conventional"].shed_events > 0
    rows = cmp.summary_rows()
    assert [(r["multiplier"], r["formulation"]) for r in rows] == [(1.0, "conventional"), (1.0, "proposed")]


def test_single_central_scenario_costs_no_shedding():
    study = toy_study()
    sc = grid_scenarios(study.forecast, 3, [study.forecast.values[2]])
    cmp = run_comparison(study, [1.0], scenarios=sc)
    for f in ("conventional", "proposed"):
        assert cmp[1.0][f].average_shed_cost == 0.0
        assert cmp[1.0][f].count == 1


def test_report_shapes():
    study = toy_study()
    sc = grid_scenarios(study.forecast, 3, [640.0, 665.0])
    cmp = run_comparison(study, [0.5, 1.0, 1.5], scenarios=sc)
    plot = evaluation.plot_data_csv(cmp).splitlines()
    assert len(plot) == 1 + 3 * 2
    report = evaluation.report_csv(cmp).splitlines()
    assert sum(1 for r in report if r.startswith("scenario,")) == 3 * 2 * 2
    assert sum(1 for r in report if r.startswith("aggregate,")) == 6


def test_expected_cost_uses_compensated_sum():
    r = evaluation.EvaluationReport("conventional", 1.0, "ok")
    for v in (1e16, 1.0, -1e16):
        r.add(evaluation.ScenarioResult(v, 0.0, 0.0, 0.0, [], {}))
    assert r.average_generation_cost == pytest.approx(1 / 3)
    assert math.isnan(evaluation.EvaluationReport("proposed", 1.0, "ok").expected_cost)


def test_infeasible_day_ahead_reported_per_formulation():
    study = toy_study()
    sc = grid_scenarios(study.forecast, 3, [640.0])
    cmp = run_comparison(study, [20.0], scenarios=sc)
    statuses = {f: cmp[20.0][f].status for f in ("conventional", "proposed")}
    assert statuses == {"conventional": "infeasible", "proposed": "infeasible"}


def test_time_limited_schedule_is_scored_but_flagged(monkeypatch):
    study = toy_study()
    sc = grid_scenarios(study.forecast, 3, [640.0])
    solve = evaluation.day_ahead_schedule

    def stopped_early(*a, **kw):
        return dataclasses.replace(solve(*a, **kw), status="gap-limit", gap=0.05)

    monkeypatch.setattr(evaluation, "day_ahead_schedule", stopped_early)
    cmp = run_comparison(study, [1.0], scenarios=sc)
    for f in ("conventional", "proposed"):
        r = cmp[1.0][f]
        assert (r.status, r.count, r.schedule_gap) == ("gap-limit", 1, 0.05)
    assert {row["status"] for row in cmp.summary_rows()} == {"gap-limit"}
