import json

import pytest

from deliverysim import BoundsError, SchemaError, load_scenario, save_scenario
from deliverysim.scenario import bundled, read_scenario, write_scenario

MINIMAL = {"grid": {"rows": 2, "cols": 2, "cell_size_m": 1.0}}


def test_minimal_document():
    sc = load_scenario(MINIMAL)
    assert sc.grid.rows == 2 and sc.tags == ()
    assert sc.params.source is None


def test_tag_out_of_bounds():
    doc = {"grid": {"rows": 3, "cols": 3, "cell_size_m": 1.0}, "tags": [{"pos": [5, 5], "code": "01-10-11"}]}
    with pytest.raises(BoundsError):
        load_scenario(doc)


@pytest.mark.parametrize("doc", [
    {},
    {"grid": {"rows": 2, "cols": 2}},
    {"grid": {"rows": 2, "cols": 2, "cell_size_m": 1.0}, "extra": 1},
    {"grid": {"rows": 2, "cols": 2, "cell_size_m": 1.0}, "tags": [{"pos": [0, 0], "code": "0-1-1"}]},
    {"grid": {"rows": 2, "cols": 2, "cell_size_m": 1.0}, "detector": {"accuracy": 2}},
    "not json",
])
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        load_scenario(doc)


def test_mission_outside_grid():
    doc = dict(MINIMAL, mission={"source": [0, 0], "dest": [2, 2]})
    with pytest.raises(BoundsError):
        load_scenario(doc)


@pytest.mark.parametrize("name", ["demo_4x4", "dynamic_6x6", "calibrated_tags_60m", "calibrated_grids_40m"])
def test_bundled_round_trip(name, tmp_path):
    sc = read_scenario(bundled(name))
    out = tmp_path / "s.json"
    write_scenario(sc, out)
    again = read_scenario(out)
    assert again == sc
    assert save_scenario(load_scenario(json.loads(out.read_text()))) == save_scenario(sc)
    sc.config()
