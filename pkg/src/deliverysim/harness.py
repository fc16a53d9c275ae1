"""Monte Carlo success-rate sweeps over tag count and grid number.

Each trial gets its own generator seeded from ``(master_seed, variable,
value, trial)`` so results do not depend on the order points are run in.
"""
from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .mapmodel import CellCoord, GridMap, grid_to_graph, locate_vertex
from .mission import SimConfig, run_mission
from .planner import shortest_path
from .rfid import spread_tags
from .scenario import Scenario

TAG_COUNTS = tuple(range(5, 51, 5))
GRID_NUMBERS = tuple(range(4, 13))
CSV_HEADER = ("variable", "distance_m", "successes", "trials", "success_rate")

_VARIABLE_IDS = {"tag_count": 1, "grid_number": 2}


@dataclass(frozen=True)
class SweepRow:
    value: int
    distance_m: float
    successes: int
    trials: int

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials


@dataclass
class SweepResult:
    variable: str
    rows: list = field(default_factory=list)

    def peak(self) -> SweepRow:
        """Row with the best success rate; the lowest value wins ties."""
        return max(self.rows, key=lambda r: (r.success_rate, -r.value))

    def rates(self) -> list[float]:
        return [r.success_rate for r in self.rows]


@dataclass(frozen=True)
class SweepConfig:
    variable: str
    base: Scenario
    values: tuple = ()
    trials_per_point: int = 500
    master_seed: int = 0
    tag_count: int = 10
    sector_cols: int = 10
    jobs: int = 1

    def __post_init__(self):
        if self.variable not in _VARIABLE_IDS:
            raise ConfigError(f"unknown sweep variable {self.variable!r}")
        if self.trials_per_point < 1:
            raise ConfigError("trials_per_point must be at least 1")
        if not self.values:
            default = TAG_COUNTS if self.variable == "tag_count" else GRID_NUMBERS
            object.__setattr__(self, "values", default)
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.sector_cols < 1:
            raise ConfigError("sector_cols must be positive")

    @classmethod
    def from_scenario(cls, variable: str, base: Scenario, **overrides) -> "SweepConfig":
        """Sweep settings from the scenario's ``sweep`` block, then ``overrides``."""
        block = base.params.sweep
        kw = {k: block[k] for k in ("values", "tag_count", "sector_cols") if k in block}
        if "trials" in block:
            kw["trials_per_point"] = block["trials"]
        if "master_seed" in block:
            kw["master_seed"] = block["master_seed"]
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(variable=variable, base=base, **kw)


def trial_rng(master_seed: int, variable: str, value: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(master_seed), _VARIABLE_IDS[variable], int(value), int(trial)])
    return np.random.default_rng(ss)


def planned_route(config: SimConfig) -> list[CellCoord]:
    """Route on the static map, before anything is detected."""
    g = grid_to_graph(config.grid)
    p = shortest_path(g, locate_vertex(g, config.source), locate_vertex(g, config.dest))
    return list(p.cells)


def with_spread_tags(config: SimConfig, count: int) -> tuple[SimConfig, float]:
    route = planned_route(config)
    tags = spread_tags(route, count)
    dist = (len(route) - 1) * config.grid.cell_size
    return SimConfig(**{**config.__dict__, "tags": tuple(tags)}), dist


def scale_scenario(base: Scenario, grid_number: int, sector_cols: int) -> Scenario:
    """Repeat the base map's first sector ``grid_number`` times.

    The route runs left to right; the result has ``grid_number * sector_cols
    + 1`` columns and the destination moves to the last column.
    """
    if grid_number < 1:
        raise ConfigError("grid_number must be positive")
    grid = base.grid
    p = base.params
    if p.source is None or p.dest is None:
        raise ConfigError("base scenario has no mission")
    if sector_cols > grid.cols:
        raise ConfigError("sector wider than the base grid")
    cols = grid_number * sector_cols + 1
    last = grid.cols - 1

    def tile(cells):
        out = set()
        for r, c in cells:
            if c < sector_cols:
                out.update((r, c + k * sector_cols) for k in range(grid_number))
            elif c == last:
                out.add((r, cols - 1))
        return frozenset(out)

    new_grid = GridMap(grid.rows, cols, grid.cell_size, tile(grid.obstacles), tile(grid.dynamic_truth))
    dest = CellCoord(p.dest.row, cols - 1 if p.dest.col == last else p.dest.col)
    new_params = type(p)(**{**p.__dict__, "dest": dest})
    return Scenario(new_grid, (), new_params)


def _run_point(args) -> int:
    config, variable, value, seeds, master_seed = args
    wins = 0
    for t in seeds:
        log = run_mission(config, trial_rng(master_seed, variable, value, t))
        wins += log.success
    return wins


def _count_successes(config: SimConfig, cfg: SweepConfig, value: int, pool) -> int:
    n = cfg.trials_per_point
    if pool is None:
        return _run_point((config, cfg.variable, value, range(n), cfg.master_seed))
    chunks = np.array_split(np.arange(n), cfg.jobs)
    jobs = [(config, cfg.variable, value, [int(t) for t in c], cfg.master_seed) for c in chunks if len(c)]
    return sum(pool.map(_run_point, jobs))


def _sweep(cfg: SweepConfig, point_config) -> SweepResult:
    result = SweepResult(cfg.variable)
    pool = ProcessPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
    try:
        for value in cfg.values:
            config, dist = point_config(value)
            wins = _count_successes(config, cfg, value, pool)
            result.rows.append(SweepRow(value, dist, wins, cfg.trials_per_point))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def sweep_tags(cfg: SweepConfig) -> SweepResult:
    """Success rate against the number of tags spread along the route."""
    if cfg.variable != "tag_count":
        raise ConfigError("sweep_tags needs variable='tag_count'")
    base = cfg.base.config()
    return _sweep(cfg, lambda n: with_spread_tags(base, n))


def sweep_grids(cfg: SweepConfig) -> SweepResult:
    """Success rate against route length measured in grid sectors."""
    if cfg.variable != "grid_number":
        raise ConfigError("sweep_grids needs variable='grid_number'")

    def point(g):
        return with_spread_tags(scale_scenario(cfg.base, g, cfg.sector_cols).config(), cfg.tag_count)

    return _sweep(cfg, point)


def emit_csv(result: SweepResult, path) -> Path:
    if not result.rows:
        raise ConfigError("empty sweep result")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow([r.value, repr(r.distance_m), r.successes, r.trials, repr(r.success_rate)])
    return path


def read_csv(path, variable: str = "tag_count") -> SweepResult:
    result = SweepResult(variable)
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ConfigError(f"unexpected sweep CSV header {reader.fieldnames}")
        for row in reader:
            result.rows.append(SweepRow(int(row["variable"]), float(row["distance_m"]),
                                        int(row["successes"]), int(row["trials"])))
    return result


_AXIS_LABELS = {"tag_count": "RFID tag count", "grid_number": "Grid number"}


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def emit_svg(results: SweepResult | Sequence[SweepResult], path, title: str = "") -> Path:
    """Line chart of success rate, one polyline per result."""
    series = [results] if isinstance(results, SweepResult) else list(results)
    if not series or not any(s.rows for s in series):
        raise ConfigError("empty sweep result")
    width, height = 640, 400
    left, right, top, bottom = 70, 20, 40, 60
    pw, ph = width - left - right, height - top - bottom
    xs = [r.value for s in series for r in s.rows]
    x0, x1 = min(xs), max(xs)
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - y) * ph

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    axes = ET.SubElement(svg, "g", stroke="black", fill="none")
    ET.SubElement(axes, "line", x1=str(left), y1=str(top + ph), x2=str(left + pw), y2=str(top + ph))
    ET.SubElement(axes, "line", x1=str(left), y1=str(top), x2=str(left), y2=str(top + ph))
    labels = ET.SubElement(svg, "g", fill="black", attrib={"font-family": "sans-serif", "font-size": "12"})
    for t in _nice_ticks(x0, x1):
        ET.SubElement(axes, "line", x1=f"{px(t):.2f}", y1=str(top + ph), x2=f"{px(t):.2f}", y2=str(top + ph + 5))
        el = ET.SubElement(labels, "text", x=f"{px(t):.2f}", y=str(top + ph + 18), attrib={"text-anchor": "middle"})
        el.text = f"{t:g}"
    for t in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        ET.SubElement(axes, "line", x1=str(left - 5), y1=f"{py(t):.2f}", x2=str(left), y2=f"{py(t):.2f}")
        el = ET.SubElement(labels, "text", x=str(left - 8), y=f"{py(t) + 4:.2f}", attrib={"text-anchor": "end"})
        el.text = f"{t:.1f}"
    xl = ET.SubElement(labels, "text", x=str(left + pw / 2), y=str(height - 15), attrib={"text-anchor": "middle"})
    xl.text = _AXIS_LABELS.get(series[0].variable, series[0].variable)
    yl = ET.SubElement(labels, "text", x="18", y=str(top + ph / 2), transform=f"rotate(-90 18 {top + ph / 2})",
                       attrib={"text-anchor": "middle"})
    yl.text = "Success rate"
    if title:
        tl = ET.SubElement(labels, "text", x=str(width / 2), y="22", attrib={"text-anchor": "middle"})
        tl.text = title
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    for i, s in enumerate(series):
        pts = " ".join(f"{px(r.value):.2f},{py(r.success_rate):.2f}" for r in s.rows)
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=colors[i % len(colors)],
                      attrib={"stroke-width": "2"})
    path = Path(path)
    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)
    return path


def emit_png(results: SweepResult | Sequence[SweepResult], path, title: str = "") -> Path:
    """Matplotlib rendering of the same chart."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = [results] if isinstance(results, SweepResult) else list(results)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for s in series:
        ax.plot([r.value for r in s.rows], [r.success_rate for r in s.rows], marker="o")
    ax.set_xlabel(_AXIS_LABELS.get(series[0].variable, series[0].variable))
    ax.set_ylabel("Success rate")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
