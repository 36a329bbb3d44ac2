import copy
import json

import pytest
from hypothesis import given, strategies as st

from rampuc import fleet
from rampuc.system import (
    FAST,
    SLOW,
    BoundaryCondition,
    Generator,
    InvariantError,
    StudyFormatError,
    TrajectoryError,
    dump_system,
    fixture_path,
    ieee118_study,
    load_system,
    parse_study,
    study_document,
)


def toy_doc():
    return json.loads(fixture_path("toy.json").read_text())


def slow(su=(10.0, 20.0), sd=(20.0, 10.0), p_min=40.0):
    return Generator("S", SLOW, 0, 10, 0, 100, p_min, 30, 40, 40, su, sd)


def test_toy_fixture_loads(toy):
    assert [g.id for g in toy.generators] == ["G1", "G2", "G3", "G4"]
    assert toy.forecast.values == (690.0, 660.0, 640.0, 620.0)
    assert toy.boundary.initial_power["G3"] == 190.0
    assert len(toy.config.rolling_forecasts) == 3


def test_round_trip(tmp_path, toy):
    path = dump_system(toy, tmp_path / "toy.json", "toy")
    again = load_system(path)
    assert again == toy


def test_synthetic_fixture_matches_generator(tmp_path):
    path = dump_system(fleet.ieee118_study(), tmp_path / "f.json",
                       "synthetic 54-unit slow-start fleet, 24 hourly periods (seed 118)")
    assert path.read_text() == fixture_path("ieee118_synthetic.json").read_text()
    s = ieee118_study()
    assert len(s.generators) == 54 and all(g.is_slow for g in s.generators)
    assert len(s.forecast) == 24


def test_synthetic_fleet_is_seeded():
    assert fleet.synthetic_fleet(5) == fleet.synthetic_fleet(5)
    assert fleet.synthetic_fleet(5) != fleet.synthetic_fleet(6)


def test_synthetic_fleet_covers_net_load():
    s = fleet.ieee118_study()
    assert sum(g.p_max for g in s.generators) > 1.5 * max(s.forecast.values)
    assert sum(g.p_min for g in s.generators) < min(s.forecast.values) * 2


@pytest.mark.parametrize("mutate, exc", [
    (lambda d: d.pop("generators"), StudyFormatError),
    (lambda d: d.update(format="other"), StudyFormatError),
    (lambda d: d.update(version=9), StudyFormatError),
    (lambda d: d["generators"][1].update(p_max="big"), StudyFormatError),
    (lambda d: d["generators"][1].update(colour="red"), StudyFormatError),
    (lambda d: d["config"].update(speed=3), StudyFormatError),
    (lambda d: d["generators"][1].update(p_min=500.0), InvariantError),
    (lambda d: d["generators"][1].update({"class": "nuclear"}), InvariantError),
    (lambda d: d["generators"][2].update(id="G2"), InvariantError),
    (lambda d: d["boundary"]["initial_power"].pop("G4"), InvariantError),
    (lambda d: d["boundary"]["commitments"]["G1"].update({"0": 0}), InvariantError),
    (lambda d: d["boundary"]["commitments"]["G2"].pop("0"), InvariantError),
    (lambda d: d["series"].update(net_load=[1.0]), InvariantError),
    (lambda d: d["config"].update(voll=0), InvariantError),
])
def test_rejects_bad_documents(mutate, exc):
    d = copy.deepcopy(toy_doc())
    mutate(d)
    with pytest.raises(exc):
        parse_study(d)


def test_missing_file_is_format_error(tmp_path):
    with pytest.raises(StudyFormatError):
        load_system(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(StudyFormatError, match="bad.json:1"):
        load_system(bad)


def test_trajectory_validation_reports_segment():
    slow()
    with pytest.raises(TrajectoryError, match=r"startup_trajectory\[1->2\]"):
        slow(su=(20.0, 10.0))
    with pytest.raises(TrajectoryError, match=r"shutdown_trajectory\[1->2\]"):
        slow(sd=(10.0, 20.0))
    with pytest.raises(TrajectoryError, match=r"startup_trajectory\[2\]"):
        slow(su=(10.0, 50.0))
    with pytest.raises(TrajectoryError):
        slow(su=())
    with pytest.raises(InvariantError):
        Generator("F", FAST, 0, 0, 0, 10, 5, 1, 1, 1, (1.0,))


def test_boundary_min_time_history():
    g = Generator("F", FAST, 0, 0, 0, 10, 5, 5, 5, 5, min_up=3)
    ok = BoundaryCondition(3, {"F": 5.0}, {("F", 0): 0, ("F", 1): 1, ("F", 2): 1})
    ok.validate([g])  # run still open at the window start
    bad = BoundaryCondition(4, {"F": 0.0}, {("F", 0): 0, ("F", 1): 1, ("F", 2): 1, ("F", 3): 0})
    with pytest.raises(InvariantError, match="minimum up"):
        bad.validate([g])
    assert ok.history("F", -5) == 0
    assert ok.history("F", 2) == 1


@given(st.lists(st.floats(0.5, 40.0), min_size=1, max_size=4),
       st.lists(st.floats(0.5, 40.0), min_size=1, max_size=4))
def test_sorted_trajectories_always_validate(su, sd):
    g = slow(su=sorted(su), sd=sorted(sd, reverse=True))
    assert g.su_periods == len(su) and g.sd_periods == len(sd)


def test_document_keys_stable(toy):
    doc = study_document(toy, "toy")
    assert set(doc) == {"format", "version", "name", "config", "generators", "series", "boundary"}
    assert doc["generators"][0]["class"] == "must-run"
