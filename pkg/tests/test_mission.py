import io
import math

import numpy as np
import pytest

from deliverysim import (BlockedCell, ConfigError, GridMap, Outcome, RobotState, SimConfig,
                         TagPlacement, grid_to_graph, linear_speed, locate_vertex, on_detection,
                         run_mission, step)
from deliverysim.mission import EventType, parse_path, read_events_csv
from deliverysim.odm import DetectionEvent, DetectorModel
from deliverysim.planner import cell_path
from deliverysim.rfid import ReadModel, spread_tags
from deliverysim.scenario import bundled, read_scenario

PERFECT = DetectorModel(accuracy=1.0)
CERTAIN = ReadModel(base_read_probability=1.0)


def test_linear_speed():
    assert linear_speed(60, 1 / math.pi) == pytest.approx(1.0)
    assert linear_speed(200, 0.1) == pytest.approx(1.0471975512)


def _corridor(n=61, **kw):
    grid = GridMap(1, n)
    return SimConfig(grid, (0, 0), (0, n - 1), **kw)


def _walk(cfg, cells, rng=None):
    rng = rng or np.random.default_rng(0)
    s = cfg.start_state()
    events = []
    for c in cells:
        s, ev = step(s, c, cfg, rng)
        events += ev
    return s, events


def test_drift_grows_linearly():
    cfg = _corridor(drift_per_meter=0.02)
    s, _ = _walk(cfg, [(0, c) for c in range(1, 61)])
    assert s.drift == pytest.approx(1.2)
    assert s.position_error() == pytest.approx(1.2)
    assert s.clock == pytest.approx(60 / cfg.speed)


def test_mid_route_tag_halves_drift():
    tag = TagPlacement((0, 30), "01-10-11")
    cfg = _corridor(drift_per_meter=0.02, tags=(tag,), read_model=CERTAIN)
    s, events = _walk(cfg, [(0, c) for c in range(1, 61)])
    assert s.drift <= 0.6 + 1e-12
    hits = [e for e in events if e.kind is EventType.TAG_HIT]
    assert len(hits) == 1 and hits[0].cell == (0, 30)
    assert s.clock == pytest.approx(60 / cfg.speed + 75)


def test_step_rejects_bad_moves():
    grid = GridMap(2, 2, obstacles={(1, 1)}, dynamic_truth={(0, 1)})
    cfg = SimConfig(grid, (0, 0), (1, 0))
    s = cfg.start_state()
    with pytest.raises(ValueError):
        step(s, (1, 1), cfg, np.random.default_rng(0))
    with pytest.raises(BlockedCell):
        step(s, (0, 1), cfg, np.random.default_rng(0))


def test_slow_robot_never_reads():
    tag = TagPlacement((0, 1), "01-10-11")
    cfg = _corridor(n=3, tags=(tag,), read_model=CERTAIN, rpm=150)
    _, events = _walk(cfg, [(0, 1)])
    assert [e.fields()["reason"] for e in events if e.kind is EventType.TAG_MISS] == ["below_min_rpm"]


def test_on_detection_reroutes_corridor():
    grid = GridMap(3, 3)
    g = grid_to_graph(grid)
    before = cell_path(g, (1, 0), (1, 2))
    assert (1, 1) in before.cells
    h = on_detection(DetectionEvent((1, 1), True, True), g)
    after = cell_path(h, (1, 0), (1, 2))
    assert (1, 1) not in after.cells and after.cost == 4
    assert g.vertex_count == h.vertex_count


def test_on_detection_leaves_other_routes():
    g = grid_to_graph(GridMap(3, 3))
    before = cell_path(g, (0, 0), (0, 2))
    h = on_detection(DetectionEvent((2, 2), True, False), g)
    assert cell_path(h, (0, 0), (0, 2)) == before
    assert on_detection(DetectionEvent((0, 1), False, False), g) is g


def test_on_detection_disconnects():
    from deliverysim import NoPath

    g = grid_to_graph(GridMap(1, 3))
    h = on_detection(DetectionEvent((0, 1), True, True), g)
    with pytest.raises(NoPath):
        cell_path(h, (0, 0), (0, 2))


def test_demo_4x4_success_and_accounting():
    cfg = read_scenario(bundled("demo_4x4")).config()
    log = run_mission(cfg, 0)
    assert log.outcome is Outcome.SUCCESS
    assert log.total_distance == 2 * 6 * cfg.grid.cell_size
    dwells = [e for e in log.events if e.kind is EventType.DWELL]
    assert len(dwells) == 1 and dwells[0].fields()["duration"] == "120.0"
    moves = [e for e in log.events if e.kind is EventType.MOVE]
    assert len(moves) == 12
    step_time = math.fsum(float(e.fields()["dt"]) for e in moves)
    assert log.relocalizations == 2
    assert log.total_time == pytest.approx(step_time + 75 * log.relocalizations + 120, abs=1e-9)
    assert log.total_time == replay_clock(log)


def replay_clock(log):
    """Re-add the clock components in event order (same float rounding)."""
    t = 0.0
    for e in log.events:
        f = e.fields()
        if e.kind is EventType.MOVE:
            t += float(f["dt"])
        elif e.kind is EventType.TAG_HIT:
            t += float(f["reloc_s"])
        elif e.kind is EventType.DWELL:
            t += float(f["duration"])
    return t


def test_times_non_decreasing_and_distance_sum():
    cfg = read_scenario(bundled("dynamic_6x6")).config()
    for seed in range(20):
        log = run_mission(cfg, seed)
        times = [e.time for e in log.events]
        assert times == sorted(times)
        moves = [e for e in log.events if e.kind is EventType.MOVE]
        assert log.total_distance == pytest.approx(sum(float(e.fields()["dist"]) for e in moves))


def test_blind_detector_on_open_map():
    grid = GridMap(6, 6)
    cfg = SimConfig(grid, (0, 0), (5, 5), detector=DetectorModel(accuracy=0.0))
    for seed in range(10):
        assert run_mission(cfg, seed).outcome in (Outcome.SUCCESS, Outcome.FAILURE_NO_PATH)


def test_same_seed_same_log():
    cfg = read_scenario(bundled("dynamic_6x6")).config()
    a, b = run_mission(cfg, 11), run_mission(cfg, 11)
    assert a.events == b.events and a.outcome == b.outcome


def test_more_drift_never_helps():
    base = read_scenario(bundled("calibrated_grids_40m")).config()
    cfg0, _ = _tagged(base, 6)
    rates = []
    for d in (0.0, 0.04, 0.08):
        cfg = SimConfig(**{**cfg0.__dict__, "drift_per_meter": d, "time_budget": math.inf})
        rates.append(sum(run_mission(cfg, np.random.default_rng([7, t])).success for t in range(500)))
    assert rates[0] >= rates[1] >= rates[2]
    assert rates[0] > rates[2]


def _tagged(cfg, n):
    from deliverysim.harness import with_spread_tags

    return with_spread_tags(cfg, n)


def test_drift_threshold_fails_mission():
    cfg = _corridor(n=11, drift_per_meter=0.1, success_drift_threshold=0.5, detector=PERFECT)
    log = run_mission(cfg, 0)
    assert log.outcome is Outcome.FAILURE_DRIFT


def test_time_budget_fails_mission():
    cfg = _corridor(n=11, time_budget=5.0, detector=PERFECT)
    assert run_mission(cfg, 0).outcome is Outcome.FAILURE_TIMEOUT


def test_missed_dynamic_obstacle_is_collision():
    grid = GridMap(1, 4, dynamic_truth={(0, 2)})
    cfg = SimConfig(grid, (0, 0), (0, 3), detector=DetectorModel(tpr=0.0, fpr=0.0))
    log = run_mission(cfg, 0)
    assert log.outcome is Outcome.FAILURE_COLLISION
    assert (0, 2) not in log.trajectory()


def test_config_validation():
    grid = GridMap(2, 2, dynamic_truth={(1, 1)})
    with pytest.raises(ConfigError):
        SimConfig(grid, (0, 0), (0, 0))
    with pytest.raises(ConfigError):
        SimConfig(grid, (0, 0), (1, 1))
    with pytest.raises(ConfigError):
        SimConfig(grid, (0, 0), (0, 1), drift_per_meter=-1)


def test_log_csv_round_trip():
    cfg = read_scenario(bundled("dynamic_6x6")).config()
    log = run_mission(cfg, 3)
    text = log.to_csv()
    assert text.splitlines()[0] == "time_s,event_type,row,col,detail"
    assert read_events_csv(io.StringIO(text)) == log.events
    assert list(log.summary()) == ["outcome", "total_time_s", "total_distance_m", "relocalizations", "replans"]


def test_parse_path():
    assert parse_path("0:0 0:1 1:1") == [(0, 0), (0, 1), (1, 1)]
