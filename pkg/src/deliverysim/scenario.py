"""Scenario files: one JSON document describing map, tags, robot and mission.

Required key: ``grid``.  Optional keys: ``tags``, ``robot``, ``detector``,
``mission``, and the extensions ``rfid``, ``limits`` and ``sweep``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import jsonschema

from .errors import BoundsError, ConfigError, SchemaError
from .mapmodel import CellCoord, GridMap
from .mission import DWELL_SECONDS, SimConfig
from .odm import DETECTOR_ACCURACY, DetectorModel
from .rfid import MAX_READ_RANGE_M, ReadModel, TagPlacement

_CELL = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}
_NONNEG = {"type": "number", "minimum": 0}
_PROB = {"type": "number", "minimum": 0, "maximum": 1}

SCHEMA = {
    "type": "object",
    "required": ["grid"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["rows", "cols", "cell_size_m"],
            "properties": {
                "rows": {"type": "integer", "minimum": 1},
                "cols": {"type": "integer", "minimum": 1},
                "cell_size_m": {"type": "number", "exclusiveMinimum": 0},
                "obstacles": {"type": "array", "items": _CELL},
                "dynamic": {"type": "array", "items": _CELL},
            },
            "additionalProperties": False,
        },
        "tags": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["pos", "code"],
                "properties": {
                    "pos": _CELL,
                    "code": {"type": "string", "pattern": "^[01]{2}-[01]{2}-[01]{2}$"},
                    "read_range_m": {"type": "number", "exclusiveMinimum": 0, "maximum": MAX_READ_RANGE_M},
                },
                "additionalProperties": False,
            },
        },
        "robot": {
            "type": "object",
            "properties": {
                "rpm": _NONNEG,
                "wheel_diameter_m": {"type": "number", "exclusiveMinimum": 0},
                "drift_per_m": _NONNEG,
            },
            "additionalProperties": False,
        },
        "detector": {
            "type": "object",
            "properties": {
                "accuracy": _PROB,
                "seed": {"type": "integer", "minimum": 0},
                "tpr": _PROB,
                "fpr": _PROB,
            },
            "additionalProperties": False,
        },
        "mission": {
            "type": "object",
            "required": ["source", "dest"],
            "properties": {"source": _CELL, "dest": _CELL},
            "additionalProperties": False,
        },
        "rfid": {
            "type": "object",
            "properties": {
                "read_probability": _PROB,
                "min_rpm": _NONNEG,
                "relocalization_s": _NONNEG,
            },
            "additionalProperties": False,
        },
        "limits": {
            "type": "object",
            "properties": {
                "time_budget_s": _NONNEG,
                "drift_threshold_m": _NONNEG,
                "dwell_s": _NONNEG,
            },
            "additionalProperties": False,
        },
        "sweep": {"type": "object"},
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class SimParams:
    """Everything in a scenario besides the map and the tags."""

    rpm: float = 200.0
    wheel_diameter: float = 0.1
    drift_per_meter: float = 0.0
    detector: DetectorModel = DetectorModel()
    read_model: ReadModel = ReadModel()
    source: CellCoord | None = None
    dest: CellCoord | None = None
    time_budget: float = math.inf
    drift_threshold: float = math.inf
    dwell: float = DWELL_SECONDS
    sweep: dict = field(default_factory=dict)
    name: str = ""
    description: str = ""


class Scenario(NamedTuple):
    grid: GridMap
    tags: tuple
    params: SimParams

    def config(self, tags=None) -> SimConfig:
        p = self.params
        if p.source is None or p.dest is None:
            raise ConfigError("scenario has no mission section")
        return SimConfig(
            grid=self.grid,
            source=p.source,
            dest=p.dest,
            tags=self.tags if tags is None else tuple(tags),
            detector=p.detector,
            read_model=p.read_model,
            rpm=p.rpm,
            wheel_diameter=p.wheel_diameter,
            drift_per_meter=p.drift_per_meter,
            dwell_at_destination=p.dwell,
            success_drift_threshold=p.drift_threshold,
            time_budget=p.time_budget,
        )


def _cell(grid: GridMap, pair, what: str) -> CellCoord:
    cell = CellCoord(int(pair[0]), int(pair[1]))
    if not grid.in_bounds(cell):
        raise BoundsError(f"{what} {list(cell)} outside {grid.rows}x{grid.cols} grid")
    return cell


def load_scenario(document: dict[str, Any] | str) -> Scenario:
    """Validate a scenario document (a dict or JSON text)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise SchemaError(f"scenario is not valid JSON: {e}") from None
    try:
        jsonschema.validate(document, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {e.message}") from None

    g = document["grid"]
    grid = GridMap(
        rows=g["rows"],
        cols=g["cols"],
        cell_size=float(g["cell_size_m"]),
        obstacles=frozenset(map(tuple, g.get("obstacles", []))),
        dynamic_truth=frozenset(map(tuple, g.get("dynamic", []))),
    )
    tags = tuple(
        TagPlacement(_cell(grid, t["pos"], "tag"), t["code"], float(t.get("read_range_m", MAX_READ_RANGE_M)))
        for t in document.get("tags", [])
    )
    robot = document.get("robot", {})
    det = document.get("detector", {})
    rfid = document.get("rfid", {})
    limits = document.get("limits", {})
    mission = document.get("mission")
    params = SimParams(
        rpm=float(robot.get("rpm", 200.0)),
        wheel_diameter=float(robot.get("wheel_diameter_m", 0.1)),
        drift_per_meter=float(robot.get("drift_per_m", 0.0)),
        detector=DetectorModel(
            accuracy=float(det.get("accuracy", DETECTOR_ACCURACY)),
            rng_seed=int(det.get("seed", 0)),
            tpr=det.get("tpr"),
            fpr=det.get("fpr"),
        ),
        read_model=ReadModel(
            min_rpm=float(rfid.get("min_rpm", 200.0)),
            relocalization_duration=float(rfid.get("relocalization_s", 75.0)),
            base_read_probability=float(rfid.get("read_probability", 0.95)),
        ),
        source=_cell(grid, mission["source"], "mission.source") if mission else None,
        dest=_cell(grid, mission["dest"], "mission.dest") if mission else None,
        time_budget=float(limits.get("time_budget_s", math.inf)),
        drift_threshold=float(limits.get("drift_threshold_m", math.inf)),
        dwell=float(limits.get("dwell_s", DWELL_SECONDS)),
        sweep=dict(document.get("sweep", {})),
        name=document.get("name", ""),
        description=document.get("description", ""),
    )
    return Scenario(grid, tags, params)


def save_scenario(scenario: Scenario) -> dict[str, Any]:
    """Inverse of :func:`load_scenario`; infinite limits are omitted."""
    grid, tags, p = scenario
    doc: dict[str, Any] = {}
    if p.name:
        doc["name"] = p.name
    if p.description:
        doc["description"] = p.description
    doc["grid"] = {
        "rows": grid.rows,
        "cols": grid.cols,
        "cell_size_m": grid.cell_size,
        "obstacles": [list(c) for c in sorted(grid.obstacles)],
        "dynamic": [list(c) for c in sorted(grid.dynamic_truth)],
    }
    doc["tags"] = []
    for t in tags:
        item = {"pos": list(t.pos), "code": str(t.code)}
        if t.read_range != MAX_READ_RANGE_M:
            item["read_range_m"] = t.read_range
        doc["tags"].append(item)
    doc["robot"] = {"rpm": p.rpm, "wheel_diameter_m": p.wheel_diameter, "drift_per_m": p.drift_per_meter}
    det = {"accuracy": p.detector.accuracy, "seed": p.detector.rng_seed}
    if p.detector.tpr is not None:
        det["tpr"] = p.detector.tpr
    if p.detector.fpr is not None:
        det["fpr"] = p.detector.fpr
    doc["detector"] = det
    if p.source is not None:
        doc["mission"] = {"source": list(p.source), "dest": list(p.dest)}
    doc["rfid"] = {
        "read_probability": p.read_model.base_read_probability,
        "min_rpm": p.read_model.min_rpm,
        "relocalization_s": p.read_model.relocalization_duration,
    }
    limits = {"dwell_s": p.dwell}
    if math.isfinite(p.time_budget):
        limits["time_budget_s"] = p.time_budget
    if math.isfinite(p.drift_threshold):
        limits["drift_threshold_m"] = p.drift_threshold
    doc["limits"] = limits
    if p.sweep:
        doc["sweep"] = dict(p.sweep)
    return doc


def read_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_scenario(text)


def write_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(save_scenario(scenario), indent=2) + "\n", encoding="utf-8")


def bundled(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    p = Path(__file__).with_name("scenarios") / name
    if not p.suffix:
        p = p.with_suffix(".json")
    if not p.exists():
        raise ConfigError(f"no bundled scenario {name!r}")
    return p
