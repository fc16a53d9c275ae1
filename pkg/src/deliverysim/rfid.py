"""RFID landmark tags: code format, navigation decisions and read model."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import BadIndex, ConfigError, InvalidCode
from .mapmodel import CellCoord
from .robot import Pose, RobotState

MAX_READ_RANGE_M = 15.0
FIELD_VALUES = ("00", "01", "10", "11")

_TEXT_RE = re.compile(r"^([01]{2})-([01]{2})-([01]{2})$")
_DIGITS_RE = re.compile(r"^([01]{2})([01]{2})([01]{2})$")


class NavDecision(enum.Enum):
    AT_SOURCE = "AtSource"
    ON_PATH = "OnPath"
    AT_DESTINATION = "AtDestination"


@dataclass(frozen=True)
class TagCode:
    """Six binary digits stored as three 2-bit fields ``xx``, ``yy``, ``zz``."""

    xx: str
    yy: str
    zz: str

    def __post_init__(self):
        for name in ("xx", "yy", "zz"):
            if getattr(self, name) not in FIELD_VALUES:
                raise InvalidCode(f"field {name}={getattr(self, name)!r} is not a 2-bit value")

    @classmethod
    def parse(cls, text: str) -> "TagCode":
        """Accepts ``"xx-yy-zz"`` or the bare six digits."""
        m = _TEXT_RE.match(text) or _DIGITS_RE.match(text)
        if m is None:
            raise InvalidCode(f"malformed tag code {text!r}")
        return cls(*m.groups())

    @property
    def digits(self) -> str:
        return self.xx + self.yy + self.zz

    def __str__(self) -> str:
        return f"{self.xx}-{self.yy}-{self.zz}"


SOURCE_CODE = TagCode("00", "01", "11")
DESTINATION_CODE = TagCode("00", "10", "11")
ON_PATH_CODE = TagCode("01", "10", "11")

_DECISIONS = {
    SOURCE_CODE: NavDecision.AT_SOURCE,
    DESTINATION_CODE: NavDecision.AT_DESTINATION,
    ON_PATH_CODE: NavDecision.ON_PATH,
}


def all_codes() -> list[TagCode]:
    return [TagCode(x, y, z) for x in FIELD_VALUES for y in FIELD_VALUES for z in FIELD_VALUES]


def decode(code: TagCode | str) -> NavDecision:
    if isinstance(code, str):
        code = TagCode.parse(code)
    try:
        return _DECISIONS[code]
    except KeyError:
        raise InvalidCode(f"unrecognised tag pattern {code}") from None


def encode(position_in_route: int, route_length: int) -> TagCode:
    """Code for the tag at ``position_in_route`` among ``route_length`` tags."""
    if route_length < 2:
        raise BadIndex(f"a route needs at least 2 tags, got {route_length}")
    if not 0 <= position_in_route < route_length:
        raise BadIndex(f"position {position_in_route} outside route of {route_length}")
    if position_in_route == 0:
        return SOURCE_CODE
    if position_in_route == route_length - 1:
        return DESTINATION_CODE
    return ON_PATH_CODE


@dataclass(frozen=True)
class TagPlacement:
    pos: CellCoord
    code: TagCode
    read_range: float = MAX_READ_RANGE_M

    def __post_init__(self):
        object.__setattr__(self, "pos", CellCoord(*self.pos))
        if isinstance(self.code, str):
            object.__setattr__(self, "code", TagCode.parse(self.code))
        if not 0 < self.read_range <= MAX_READ_RANGE_M:
            raise ConfigError(f"read_range must be in (0, {MAX_READ_RANGE_M}] m, got {self.read_range}")


@dataclass(frozen=True)
class ReadModel:
    min_rpm: float = 200.0
    relocalization_duration: float = 75.0
    base_read_probability: float = 0.95

    def __post_init__(self):
        if not 0.0 <= self.base_read_probability <= 1.0:
            raise ConfigError("base_read_probability must lie in [0, 1]")
        if self.relocalization_duration < 0 or self.min_rpm < 0:
            raise ConfigError("durations and speeds must be non-negative")


@dataclass(frozen=True)
class ReadOutcome:
    code: TagCode | None
    reason: str = "read"

    @property
    def hit(self) -> bool:
        return self.code is not None


def attempt_read(robot: RobotState, tag: TagPlacement, model: ReadModel, rng) -> ReadOutcome:
    """One read attempt; only consumes a random draw when range and speed allow it."""
    if robot.distance_to(tag.pos) > tag.read_range:
        return ReadOutcome(None, "out_of_range")
    if robot.wheel_rpm < model.min_rpm:
        return ReadOutcome(None, "below_min_rpm")
    if rng.random() < model.base_read_probability:
        return ReadOutcome(tag.code)
    return ReadOutcome(None, "missed")


def relocalize(robot: RobotState, tag: TagPlacement, model: ReadModel) -> RobotState:
    # blocking: position frozen while the clock runs
    return robot.evolve(
        est_pos=Pose(tag.pos),
        drift=0.0,
        clock=robot.clock + model.relocalization_duration,
    )


def spread_tags(route_cells, count: int, read_range: float = MAX_READ_RANGE_M) -> list[TagPlacement]:
    """``count`` tags spaced evenly along a route, coded by route position."""
    cells = list(route_cells)
    if count < 2:
        raise ConfigError("need at least 2 tags (source and destination)")
    if count > len(cells):
        raise ConfigError(f"{count} tags do not fit on a route of {len(cells)} cells")
    last = len(cells) - 1
    idx = [round(i * last / (count - 1)) for i in range(count)]
    return [TagPlacement(cells[k], encode(i, count), read_range) for i, k in enumerate(idx)]
