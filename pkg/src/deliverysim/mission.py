"""Mission execution: plan, traverse, detect and replan, read tags, dwell,
backtrack.

A mission is a sequential state machine driven by one RNG stream.  Failures
are reported through :class:`Outcome`, never raised.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import BlockedCell, BoundsError, ConfigError, InvalidCode, NoPath
from .mapmodel import CellCoord, GridMap, VectorGraph, grid_to_graph, locate_vertex
from .odm import DetectionEvent, DetectorModel, detect
from .planner import Path, reverse_path, shortest_path
from .rfid import ReadModel, TagPlacement, attempt_read, decode, relocalize
from .robot import Pose, RobotState

DWELL_SECONDS = 120.0


class Outcome(enum.Enum):
    SUCCESS = "Success"
    FAILURE_DRIFT = "FailureDrift"
    FAILURE_NO_PATH = "FailureNoPath"
    FAILURE_TIMEOUT = "FailureTimeout"
    FAILURE_COLLISION = "FailureCollision"


class EventType(str, enum.Enum):
    MOVE = "Move"
    TAG_HIT = "TagHit"
    TAG_MISS = "TagMiss"
    DETECTION = "Detection"
    REPLAN = "Replan"
    DWELL = "Dwell"
    BACKTRACK = "Backtrack"
    ARRIVE = "Arrive"


@dataclass(frozen=True)
class Event:
    time: float
    kind: EventType
    cell: CellCoord | None
    detail: str = ""

    def fields(self) -> dict[str, str]:
        """Parse ``detail`` (``key=value;key=value``) into a dict."""
        out = {}
        for part in self.detail.split(";"):
            if part:
                k, _, v = part.partition("=")
                out[k] = v
        return out


@dataclass(frozen=True)
class SimConfig:
    grid: GridMap
    source: CellCoord
    dest: CellCoord
    tags: tuple = ()
    detector: DetectorModel = DetectorModel()
    read_model: ReadModel = ReadModel()
    rpm: float = 200.0
    wheel_diameter: float = 0.1
    drift_per_meter: float = 0.0
    dwell_at_destination: float = DWELL_SECONDS
    success_drift_threshold: float = math.inf
    time_budget: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "source", CellCoord(*self.source))
        object.__setattr__(self, "dest", CellCoord(*self.dest))
        object.__setattr__(self, "tags", tuple(self.tags))
        for name in ("source", "dest"):
            cell = getattr(self, name)
            if not self.grid.in_bounds(cell):
                raise BoundsError(f"mission {name} {cell} outside grid")
            if self.grid.truth_occupied(cell):
                raise ConfigError(f"mission {name} {cell} is occupied")
        if self.source == self.dest:
            raise ConfigError("source and destination must differ")
        for t in self.tags:
            if not self.grid.in_bounds(t.pos):
                raise BoundsError(f"tag at {t.pos} outside grid")
        for name in ("rpm", "drift_per_meter", "dwell_at_destination",
                     "success_drift_threshold", "time_budget"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not self.wheel_diameter > 0:
            raise ConfigError("wheel_diameter must be positive")

    @property
    def speed(self) -> float:
        return linear_speed(self.rpm, self.wheel_diameter)

    def start_state(self) -> RobotState:
        return RobotState.at(self.source, wheel_rpm=self.rpm, wheel_diameter=self.wheel_diameter,
                             cell_size=self.grid.cell_size)

    def tag_index(self) -> dict:
        idx = defaultdict(list)
        for t in self.tags:
            idx[t.pos].append(t)
        return dict(idx)


def linear_speed(rpm: float, wheel_diameter: float) -> float:
    """Ground speed in m/s of a wheel turning at ``rpm``."""
    return rpm / 60.0 * math.pi * wheel_diameter


def _fmt_path(cells) -> str:
    return " ".join(f"{r}:{c}" for r, c in cells)


def parse_path(text: str) -> list[CellCoord]:
    return [CellCoord(*map(int, tok.split(":"))) for tok in text.split()]


def _move(state: RobotState, next_cell, config: SimConfig) -> tuple[RobotState, Event]:
    cur = state.cell
    dr, dc = next_cell[0] - cur[0], next_cell[1] - cur[1]
    if abs(dr) + abs(dc) != 1:
        raise ValueError(f"{next_cell} is not 4-adjacent to {cur}")
    if not config.grid.is_free(next_cell):
        raise ValueError(f"{next_cell} is a known obstacle")
    if config.grid.truth_occupied(next_cell):
        raise BlockedCell(next_cell)
    size = config.grid.cell_size
    speed = config.speed
    dt = size / speed if speed > 0 else math.inf
    err = config.drift_per_meter * size
    oy, ox = state.est_pos.offset
    new = state.evolve(
        true_pos=Pose(next_cell),
        est_pos=Pose(next_cell, (oy + dr * err, ox + dc * err)),
        drift=state.drift + err,
        clock=state.clock + dt,
    )
    ev = Event(new.clock, EventType.MOVE, next_cell, f"dt={dt!r};dist={size!r};drift={new.drift!r}")
    return new, ev


def _read_tags(state: RobotState, config: SimConfig, tags: dict, rng) -> tuple[RobotState, list[Event]]:
    events = []
    for tag in tags.get(state.cell, ()):
        res = attempt_read(state, tag, config.read_model, rng)
        if res.hit:
            try:
                decision = decode(res.code).value
            except InvalidCode:
                decision = "Unknown"
            events.append(Event(state.clock, EventType.TAG_HIT, tag.pos,
                                f"code={res.code};decision={decision};"
                                f"reloc_s={config.read_model.relocalization_duration!r}"))
            state = relocalize(state, tag, config.read_model)
        else:
            events.append(Event(state.clock, EventType.TAG_MISS, tag.pos,
                                f"code={tag.code};reason={res.reason}"))
    return state, events


def step(state: RobotState, next_cell, config: SimConfig, rng) -> tuple[RobotState, list[Event]]:
    """Advance one cell, then try every tag placed in the entered cell.

    Raises :class:`BlockedCell` when the cell is actually occupied.
    """
    state, ev = _move(state, CellCoord(*next_cell), config)
    state, reads = _read_tags(state, config, config.tag_index(), rng)
    return state, [ev, *reads]


def on_detection(event: DetectionEvent, graph: VectorGraph) -> VectorGraph:
    """Graph with the observed cell cut off; ``graph`` itself is untouched."""
    if not event.observed_occupied:
        return graph
    return graph.without_vertices([locate_vertex(graph, event.cell)])


@dataclass
class MissionLog:
    events: list = field(default_factory=list)
    outcome: Outcome | None = None
    total_distance: float = 0.0
    total_time: float = 0.0
    detections: list = field(default_factory=list)

    @property
    def relocalizations(self) -> int:
        return sum(1 for e in self.events if e.kind is EventType.TAG_HIT)

    @property
    def replans(self) -> int:
        return sum(1 for e in self.events
                   if e.kind is EventType.REPLAN and e.fields().get("reason") == "detection")

    @property
    def success(self) -> bool:
        return self.outcome is Outcome.SUCCESS

    def trajectory(self) -> list[CellCoord]:
        return [e.cell for e in self.events if e.kind is EventType.MOVE]

    def summary(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "total_time_s": self.total_time,
            "total_distance_m": self.total_distance,
            "relocalizations": self.relocalizations,
            "replans": self.replans,
        }

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "event_type", "row", "col", "detail"])
        for e in self.events:
            r, c = e.cell if e.cell is not None else ("", "")
            w.writerow([repr(e.time), e.kind.value, r, c, e.detail])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary())


def read_events_csv(fh) -> list[Event]:
    out = []
    for row in csv.DictReader(fh):
        cell = CellCoord(int(row["row"]), int(row["col"])) if row["row"] != "" else None
        out.append(Event(float(row["time_s"]), EventType(row["event_type"]), cell, row["detail"]))
    return out


class _Abort(Exception):
    def __init__(self, outcome: Outcome):
        self.outcome = outcome


class _Mission:
    def __init__(self, config: SimConfig, rng):
        self.cfg = config
        self.rng = rng
        self.graph = grid_to_graph(config.grid)
        self.tags = config.tag_index()
        self.state = config.start_state()
        self.log = MissionLog()
        self.endpoints = {config.source, config.dest}
        # cells already seen free (probed or stood in) are never re-probed
        self.known_free = {config.source}

    def emit(self, *events: Event):
        self.log.events.extend(events)

    def plan(self, goal: CellCoord, backtrack: bool) -> Path:
        g = self.graph
        try:
            if backtrack:
                # retrace: plan only over cells already travelled, reversed
                # from a forward plan so both legs share tie-breaking
                unseen = [v for v, c in enumerate(g.labels) if c not in self.known_free]
                g = g.without_vertices(unseen)
                fwd = shortest_path(g, locate_vertex(g, goal), locate_vertex(g, self.state.cell))
                return reverse_path(fwd, g)
            return shortest_path(g, locate_vertex(g, self.state.cell), locate_vertex(g, goal))
        except NoPath:
            raise _Abort(Outcome.FAILURE_NO_PATH) from None

    def check_budget(self):
        if self.state.clock > self.cfg.time_budget:
            raise _Abort(Outcome.FAILURE_TIMEOUT)

    def leg(self, goal: CellCoord, backtrack: bool, name: str):
        path = self.plan(goal, backtrack)
        reason = "backtrack" if backtrack else "initial"
        self.emit(Event(self.state.clock, EventType.REPLAN, self.state.cell,
                        f"reason={reason};path={_fmt_path(path.cells)}"))
        route = list(path.cells)
        i = 0
        while self.state.cell != goal:
            nxt = route[i + 1]
            if nxt not in self.endpoints and nxt not in self.known_free:
                ev = detect(self.cfg.grid.truth_occupied(nxt), self.cfg.detector, self.rng,
                            cell=nxt, time=self.state.clock)
                self.log.detections.append(ev)
                self.emit(Event(ev.time, EventType.DETECTION, nxt,
                                f"observed={int(ev.observed_occupied)};truth={int(ev.truth_occupied)}"))
                if not ev.observed_occupied:
                    self.known_free.add(nxt)
                else:
                    self.graph = on_detection(ev, self.graph)
                    path = self.plan(goal, backtrack)
                    self.emit(Event(self.state.clock, EventType.REPLAN, self.state.cell,
                                    f"reason=detection;path={_fmt_path(path.cells)}"))
                    route = list(path.cells)
                    i = 0
                    continue
            try:
                self.state, mv = _move(self.state, nxt, self.cfg)
            except BlockedCell:
                raise _Abort(Outcome.FAILURE_COLLISION) from None
            self.emit(mv)
            self.known_free.add(nxt)
            self.log.total_distance += self.cfg.grid.cell_size
            i += 1
            if nxt == goal:
                break
            self.state, reads = _read_tags(self.state, self.cfg, self.tags, self.rng)
            self.emit(*reads)
            self.check_budget()
        drift = self.state.drift
        self.emit(Event(self.state.clock, EventType.ARRIVE, goal, f"leg={name};drift={drift!r}"))
        if drift > self.cfg.success_drift_threshold:
            raise _Abort(Outcome.FAILURE_DRIFT)
        # endpoint tag verifies arrival
        self.state, reads = _read_tags(self.state, self.cfg, self.tags, self.rng)
        self.emit(*reads)
        self.check_budget()

    def run(self) -> MissionLog:
        cfg = self.cfg
        try:
            self.leg(cfg.dest, backtrack=False, name="outbound")
            self.state = self.state.evolve(clock=self.state.clock + cfg.dwell_at_destination)
            self.emit(Event(self.state.clock, EventType.DWELL, cfg.dest,
                            f"duration={cfg.dwell_at_destination!r}"))
            self.check_budget()
            self.emit(Event(self.state.clock, EventType.BACKTRACK, cfg.dest, ""))
            self.leg(cfg.source, backtrack=True, name="backtrack")
            self.log.outcome = Outcome.SUCCESS
        except _Abort as stop:
            self.log.outcome = stop.outcome
        self.log.total_time = self.state.clock
        return self.log


def run_mission(config: SimConfig, rng=None) -> MissionLog:
    """Run one delivery: outbound leg, dwell, backtrack leg.

    ``rng`` may be a numpy ``Generator`` or an integer seed; ``None`` uses the
    detector's seed.
    """
    if rng is None:
        rng = config.detector.rng_seed
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return _Mission(config, rng).run()
