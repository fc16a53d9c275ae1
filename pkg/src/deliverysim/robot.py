"""Robot pose and kinematic state."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .mapmodel import CellCoord


@dataclass(frozen=True)
class Pose:
    """A cell plus a metric offset ``(d_row, d_col)`` from its centre."""

    cell: CellCoord
    offset: tuple = (0.0, 0.0)

    def xy(self, cell_size: float) -> tuple[float, float]:
        return (
            self.cell[0] * cell_size + self.offset[0],
            self.cell[1] * cell_size + self.offset[1],
        )


@dataclass(frozen=True)
class RobotState:
    true_pos: Pose
    est_pos: Pose
    drift: float = 0.0
    wheel_rpm: float = 200.0
    wheel_diameter: float = 0.1
    clock: float = 0.0
    cell_size: float = 1.0

    @classmethod
    def at(cls, cell, **kw) -> "RobotState":
        cell = CellCoord(*cell)
        return cls(true_pos=Pose(cell), est_pos=Pose(cell), **kw)

    @property
    def cell(self) -> CellCoord:
        return self.true_pos.cell

    def distance_to(self, cell) -> float:
        """Euclidean distance in metres from the true position to a cell centre."""
        y, x = self.true_pos.xy(self.cell_size)
        return math.hypot(y - cell[0] * self.cell_size, x - cell[1] * self.cell_size)

    def position_error(self) -> float:
        """Metres between the estimated and true positions."""
        ey, ex = self.est_pos.xy(self.cell_size)
        ty, tx = self.true_pos.xy(self.cell_size)
        return math.hypot(ey - ty, ex - tx)

    def evolve(self, **changes) -> "RobotState":
        return replace(self, **changes)
