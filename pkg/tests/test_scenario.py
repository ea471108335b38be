import json

import pytest

from ris_planner.errors import InvalidCell, PairOutOfRange, ScenarioError, ValidationError
from ris_planner.scenario import (
    SEED_ENV, ChannelConfig, RisShape, Scenario, bundled_example, dumps_scenario, load_scenario,
    loads_scenario, save_scenario, scenario_from_dict, seed_override,
)

from conftest import GOLDEN_OBSTACLES


def _doc(**over):
    d = json.loads(bundled_example())
    d.update(over)
    return d


def _text(d):
    return "{\n" + ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in d.items()) + "\n}\n"


def test_bundled_example_is_the_golden_world():
    sc = loads_scenario(bundled_example("4x4"))
    assert (sc.grid.rows, sc.grid.cols) == (4, 4)
    assert set(sc.obstacle_cells) == set(GOLDEN_OBSTACLES)
    assert sc.coverage_radius_m == 10.0
    free = [c for c in range(1, 17) if c not in GOLDEN_OBSTACLES]
    assert len(sc.device_pairs) == len(free) * (len(free) - 1) // 2
    assert sc.ris == RisShape(4, 4, 4)
    with pytest.raises(ValidationError):
        bundled_example("9x9")


def test_round_trip(tmp_path):
    sc = loads_scenario(bundled_example())
    path = tmp_path / "s.json"
    save_scenario(sc, path)
    assert load_scenario(path) == sc
    assert dumps_scenario(load_scenario(path)) == dumps_scenario(sc)


def test_defaults_apply():
    d = {"grid": {"rows": 3, "cols": 3}, "obstacles": [5], "pairs": [[4, 6]], "radius": 5}
    sc = scenario_from_dict(d)
    assert sc.grid.cell_size == 1.0 and sc.channel == ChannelConfig() and sc.seed == 0
    assert sc.threshold == sc.params.bandwidth_hz
    assert sc.params.tx_power == pytest.approx(1.0)


def test_obstacle_out_of_grid_names_field_and_line():
    text = _text(_doc(obstacles=[3, 10, 17]))
    with pytest.raises(InvalidCell) as ei:
        loads_scenario(text)
    assert ei.value.field == "obstacles" and ei.value.line == 3
    assert "obstacles" in str(ei.value)


@pytest.mark.parametrize("mutate,field", [
    (dict(radius=-1), "radius"),
    (dict(radius="x"), "radius"),
    (dict(seed=1.5), "seed"),
    (dict(t_threshold=-3), "t_threshold"),
    (dict(pairs=[[1, 1]]), "pairs"),
    (dict(pairs=[[1, 2], [2, 1]]), "pairs"),
    (dict(extra=1), "extra"),
    (dict(ris={"rows": 4, "cols": 4, "subgroups": 3}), "ris"),
    (dict(channel={"packets": 0}), "channel"),
    (dict(channel={"colour": 1}), "channel.colour"),
    (dict(grid={"rows": 0, "cols": 4}), "grid"),
])
def test_validation_errors_are_located(mutate, field):
    with pytest.raises(ValidationError) as ei:
        loads_scenario(_text(_doc(**mutate)))
    assert ei.value.field is not None and ei.value.field.startswith(field.split(".")[0])


def test_pair_out_of_range():
    d = _doc(radius=1.0, pairs=[[1, 16]])
    with pytest.raises(PairOutOfRange):
        scenario_from_dict(d)


def test_missing_key():
    d = _doc()
    del d["grid"]
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(d)
    assert ei.value.field == "grid"


def test_duplicate_keys_and_bad_json():
    with pytest.raises(ScenarioError):
        loads_scenario('{"radius": 1, "radius": 2}')
    with pytest.raises(ScenarioError) as ei:
        loads_scenario('{\n  "grid": ,\n}')
    assert ei.value.line == 2


def test_seed_override():
    sc = loads_scenario(bundled_example())
    assert seed_override(sc, {}) is sc
    assert seed_override(sc, {SEED_ENV: "77"}).seed == 77
    assert seed_override(sc, {SEED_ENV: "0x10"}).seed == 16
    with pytest.raises(ScenarioError):
        seed_override(sc, {SEED_ENV: "nope"})


def test_scenario_is_hashable_value():
    a = loads_scenario(bundled_example())
    assert a == loads_scenario(bundled_example())
    assert isinstance(a, Scenario) and a.with_seed(1) != a
