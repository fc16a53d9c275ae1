"""Grid maps and their weighted-graph view.

A floor is a ``rows x cols`` grid of square cells.  The planner never sees the
grid directly; it works on a :class:`VectorGraph`, a dense adjacency matrix in
which a missing arc holds the :data:`INF` sentinel.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import BoundsError, ConfigError, EmptyMap, NegativeWeight, UnknownLabel

INF = math.inf


class CellCoord(NamedTuple):
    row: int
    col: int

    def __str__(self) -> str:
        return f"({self.row},{self.col})"


def _cells(items: Iterable[Sequence[int]]) -> frozenset[CellCoord]:
    return frozenset(CellCoord(int(r), int(c)) for r, c in items)


@dataclass(frozen=True)
class GridMap:
    rows: int
    cols: int
    cell_size: float = 1.0
    obstacles: frozenset = field(default_factory=frozenset)
    dynamic_truth: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", _cells(self.obstacles))
        object.__setattr__(self, "dynamic_truth", _cells(self.dynamic_truth))
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 2:
            raise ConfigError(f"grid must hold at least two cells, got {self.rows}x{self.cols}")
        if not self.cell_size > 0:
            raise ConfigError(f"cell_size must be positive, got {self.cell_size}")
        for cell in self.obstacles | self.dynamic_truth:
            if not self.in_bounds(cell):
                raise BoundsError(f"cell {cell} outside {self.rows}x{self.cols} grid")
        both = self.obstacles & self.dynamic_truth
        if both:
            raise ConfigError(f"cells both static and dynamic: {sorted(both)}")

    def in_bounds(self, cell: Sequence[int]) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols

    def is_free(self, cell: CellCoord) -> bool:
        """True when the cell is not a known static obstacle."""
        return self.in_bounds(cell) and cell not in self.obstacles

    def truth_occupied(self, cell: CellCoord) -> bool:
        return cell in self.obstacles or cell in self.dynamic_truth

    def free_cells(self) -> list[CellCoord]:
        """Non-obstacle cells in row-major order."""
        return [
            CellCoord(r, c)
            for r in range(self.rows)
            for c in range(self.cols)
            if (r, c) not in self.obstacles
        ]

    def neighbors4(self, cell: CellCoord) -> list[CellCoord]:
        r, c = cell
        out = []
        for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            n = CellCoord(r + dr, c + dc)
            if self.is_free(n):
                out.append(n)
        return out


class VectorGraph:
    """Dense weighted digraph with an INF sentinel for absent arcs.

    ``arcs`` is a read-only float array.  ``labels[i]`` names vertex ``i``;
    labels are usually :class:`CellCoord` but any hashable works.  Graphs
    derived with :meth:`without_vertices` build their matrix only on first
    access, since the planner itself works from :attr:`adjacency`.
    """

    def __init__(self, arcs, labels: Sequence[Hashable] | None = None, *, _adjacency=None):
        a = np.array(arcs, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigError(f"arc matrix must be square, got shape {a.shape}")
        if np.isnan(a).any():
            raise ConfigError("arc matrix contains NaN")
        if (a < 0).any():
            raise NegativeWeight("arc weights must be non-negative")
        if a.shape[0] and not (np.diag(a) == 0).all():
            raise ConfigError("arcs[i][i] must be 0")
        a.setflags(write=False)
        self._arcs = a
        self._base = None
        self._cut = frozenset()
        n = a.shape[0]
        self.labels = tuple(range(n)) if labels is None else tuple(labels)
        if len(self.labels) != n:
            raise ConfigError("need exactly one label per vertex")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != n:
            raise ConfigError("vertex labels must be unique")
        self._adjacency = _adjacency
        self._symmetric = None
        self._wmax = None

    @classmethod
    def from_edges(cls, n: int, edges, labels=None, symmetric: bool = True) -> "VectorGraph":
        """Build a graph from ``(i, j, weight)`` triples."""
        a = np.full((n, n), INF)
        np.fill_diagonal(a, 0.0)
        for i, j, w in edges:
            a[i, j] = w
            if symmetric:
                a[j, i] = w
        return cls(a, labels)

    @property
    def arcs(self) -> np.ndarray:
        if self._arcs is None:
            a = self._base.arcs.copy()
            idx = sorted(self._cut)
            a[idx, :] = INF
            a[:, idx] = INF
            a[idx, idx] = 0.0
            a.setflags(write=False)
            self._arcs = a
        return self._arcs

    @property
    def vertex_count(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.vertex_count

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        """Outgoing finite arcs per vertex, sorted by target index."""
        if self._adjacency is None:
            finite = np.isfinite(self.arcs)
            np.fill_diagonal(finite, False)
            adj: list[list[tuple[int, float]]] = [[] for _ in range(self.vertex_count)]
            for i, j in zip(*np.nonzero(finite)):
                adj[int(i)].append((int(j), float(self.arcs[i, j])))
            self._adjacency = adj
        return self._adjacency

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        if self._arcs is None:
            if i in self._cut or j in self._cut:
                return INF
            return self._base.weight(i, j)
        return float(self._arcs[i, j])

    def is_symmetric(self) -> bool:
        if self._symmetric is None:
            self._symmetric = bool(np.array_equal(self.arcs, self.arcs.T))
        return self._symmetric

    @property
    def max_weight(self) -> float:
        """Largest finite arc weight (0 for an arc-free graph)."""
        if self._wmax is None:
            self._wmax = max((w for row in self.adjacency for _, w in row), default=0.0)
        return self._wmax

    def finite_arc_count(self) -> int:
        """Number of finite off-diagonal arcs."""
        return int(np.isfinite(self.arcs).sum()) - self.vertex_count

    def label_of(self, index: int) -> Hashable:
        return self.labels[index]

    def without_vertices(self, vertices: Iterable[int]) -> "VectorGraph":
        """Derived graph with every arc touching ``vertices`` set to INF."""
        cut = frozenset(vertices) - self._cut
        if not cut:
            return self
        old = self.adjacency
        adj = list(old)
        touched = set(cut)
        symmetric = self.is_symmetric()
        for v in cut:
            touched.update(j for j, _ in old[v])
            if not symmetric:
                touched.update(i for i, row in enumerate(old) if any(j == v for j, _ in row))
        for i in touched:
            adj[i] = [] if i in cut else [(j, w) for j, w in old[i] if j not in cut]
        g = object.__new__(VectorGraph)
        g.labels = self.labels
        g._index = self._index
        g._adjacency = adj
        if self._arcs is None:
            g._base, g._cut = self._base, self._cut | cut
        else:
            g._base, g._cut = self, cut
        g._arcs = None
        g._symmetric = symmetric
        g._wmax = self._wmax
        return g

    def __eq__(self, other):
        if not isinstance(other, VectorGraph):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.arcs, other.arcs)

    def __hash__(self):
        return hash((self.labels, self.arcs.tobytes()))

    def __repr__(self):
        return f"VectorGraph(V={self.vertex_count})"


@functools.lru_cache(maxsize=32)
def grid_to_graph(grid: GridMap) -> VectorGraph:
    """One vertex per non-obstacle cell, 4-connected, arc weight = cell size.

    Dynamic obstacles are deliberately connected: the planner only learns
    about them through detections.
    """
    cells = grid.free_cells()
    if not cells:
        raise EmptyMap("grid has no free cell")
    index = {cell: i for i, cell in enumerate(cells)}
    n = len(cells)
    a = np.full((n, n), INF)
    np.fill_diagonal(a, 0.0)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    w = float(grid.cell_size)
    for cell, i in index.items():
        for nb in grid.neighbors4(cell):
            j = index[nb]
            a[i, j] = w
            adj[i].append((j, w))
    for row in adj:
        row.sort()
    g = VectorGraph(a, cells, _adjacency=adj)
    g._symmetric = True
    return g


def locate_vertex(graph: VectorGraph, label) -> int:
    """Index of the vertex carrying ``label``."""
    if isinstance(label, list):
        label = tuple(label)
    try:
        return graph._index[label]
    except (KeyError, TypeError):
        raise UnknownLabel(f"no vertex labelled {label!r}") from None
