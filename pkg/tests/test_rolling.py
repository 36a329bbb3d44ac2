import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from rampuc import rolling
from rampuc.requirements import study_requirements
from rampuc.system import InvariantError, toy_study
from rampuc.ucmodel import InfeasibleModelError, build_uc, solve_model

from .conftest import toy_roll, toy_window
from .oracles import random_uc_case

SHED_TOL = 1e-6


def test_conventional_roll_sheds_at_t3():
    log = toy_roll("conventional")
    assert [s.start for s in log.steps] == [1, 2, 3]
    s3 = log.step_at(3)
    assert s3.realized_nl == 665.0
    assert s3.shed == pytest.approx(15.0, abs=SHED_TOL)
    assert s3.cost == pytest.approx(146_600, rel=1e-3)
    assert log.step_at(1).shed == log.step_at(2).shed == 0.0


def test_proposed_roll_serves_t3():
    log = toy_roll("proposed")
    s3 = log.step_at(3)
    assert s3.shed == pytest.approx(0.0, abs=SHED_TOL)
    assert s3.cost == pytest.approx(13_500, rel=1e-3)
    assert s3.dispatch["G3"] == pytest.approx(165.0)


def test_boundary_inherits_previous_step():
    log = toy_roll("conventional")
    s2, s3 = log.step_at(2), log.step_at(3)
    assert s3.boundary.initial_power == s2.dispatch
    for gid in ("G1", "G2", "G3", "G4"):
        assert s3.boundary.commitment(gid, 3) == s2.solution.x(gid, 3)
        assert s3.boundary.commitment(gid, 2) == s2.solution.x(gid, 2)
    assert s3.boundary.commitment("G4", 3) == 0


@pytest.mark.parametrize("formulation, up, flagged", [
    ("conventional", -10.0, True),
    ("proposed", 80.0, False),
])
def test_audit_at_t2(formulation, up, flagged):
    _, sol = toy_window(formulation, 2)
    audit = rolling.audit_deliverable_frc(sol, toy_study().generators)
    row = audit.rows()[0]
    assert row["period"] == 2
    assert row["deliverable_up"] == pytest.approx(up, abs=1e-6)
    assert row["shortfall"] is flagged
    assert row["ufrc"] == 10.0


def test_audit_unit_capability_cases():
    _, sol = toy_window("conventional", 2)
    gens = {g.id: g for g in toy_study().generators}
    # G4 leaves at t=3 with 50 MW: that output is lost to upward capability
    assert rolling.unit_capability(sol, gens["G4"], 2)[2] == pytest.approx(-50.0)
    # G3 at 160 MW: ramp-limited headroom of 40 MW
    assert rolling.unit_capability(sol, gens["G3"], 2)[2] == pytest.approx(40.0)
    # must-run unit has no ramp
    assert rolling.unit_capability(sol, gens["G1"], 2)[:2] == (0.0, 0.0)


def test_sweep_matches_independent_runs():
    study = toy_study()
    logs = rolling.sweep(study, 3, [640.0, 665.0], "conventional")
    ref = toy_roll("conventional")
    assert logs[1].total_shed == pytest.approx(ref.total_shed)
    assert logs[1].total_cost == pytest.approx(ref.total_cost)
    rows = [list(r) for r in study.config.rolling_forecasts]
    alone = rolling.run(study, realized=[690.0, 660.0, 640.0], forecasts=rows, formulation="conventional")
    assert logs[0].total_cost == pytest.approx(alone.total_cost)
    assert logs[0].step_at(1) is logs[1].step_at(1)


def test_run_rejects_bad_inputs():
    study = toy_study()
    with pytest.raises(InvariantError):
        rolling.run(study, realized=[1.0])
    with pytest.raises(InvariantError):
        rolling.sweep(study, 9, [600.0])
    with pytest.raises(InvariantError):
        rolling.run(study, forecasts=[])


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10_000))
def test_proposed_schedules_pass_the_audit(seed):
    gens, nl, bc, cfg = random_uc_case(np.random.default_rng(seed))
    try:
        sol = solve_model(build_uc(gens, nl, bc, cfg, study_requirements(nl, cfg), "proposed",
                                   allow_shedding=True))
    except InfeasibleModelError:
        return
    audit = rolling.audit_deliverable_frc(sol, gens)
    assert not any(audit.shortfall_flag)
    for row in audit.rows():
        # awarded FRC never exceeds what the capability rows admit
        assert row["awarded_up"] <= row["scheduled_up"] + 1e-6
        assert row["awarded_down"] <= row["scheduled_down"] + 1e-6
