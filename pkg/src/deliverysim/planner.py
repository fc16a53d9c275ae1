"""Dijkstra shortest paths on a :class:`VectorGraph` and the Grid Count metric.

The auxiliary distance vector ``D`` starts at ``D[source] = 0`` and INF
elsewhere.  The frontier vertex with the smallest ``D`` is settled and every
outgoing arc ``(j, k)`` with ``D[j] + arcs[j][k] < D[k]`` is relaxed to
``D[k] = D[j] + arcs[j][k]``; this repeats until the frontier is empty.

Equal-cost alternatives resolve to the lowest-index predecessor among the
vertices settled before ``k``, which makes every path reproducible.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

from .errors import AsymmetricArc, NoPath, NotGridPath
from .mapmodel import INF, CellCoord, GridMap, VectorGraph, locate_vertex

# relative tolerance for calling two float path costs equal
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class DistanceVector:
    D: tuple
    source: int

    def __getitem__(self, i):
        return self.D[i]

    def __len__(self):
        return len(self.D)


@dataclass(frozen=True)
class Path:
    vertices: tuple
    cost: float
    labels: tuple = ()

    def __len__(self):
        return len(self.vertices)

    @property
    def cells(self) -> tuple:
        return self.labels


@dataclass(frozen=True)
class GridCount:
    row_moves: int
    col_moves: int

    @property
    def total(self) -> int:
        return self.row_moves + self.col_moves


def _run(graph: VectorGraph, source: int, target: int | None = None):
    n = graph.vertex_count
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range for {n} vertices")
    adj = graph.adjacency
    # absolute tie tolerance, scaled by the largest possible path cost
    eps = TIE_RTOL * max(1.0, graph.max_weight * n)
    dist = [INF] * n
    pred: list = [None] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d > dist[u]:
            continue
        if target is not None and done[target] and d > dist[target]:
            break
        done[u] = True
        for v, w in adj[u]:
            if done[v]:
                continue
            nd = d + w
            dv = dist[v]
            if nd < dv - eps:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd <= dv + eps and u < pred[v]:
                pred[v] = u
                if nd < dv:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
    return dist, pred, done


def dijkstra(graph: VectorGraph, source: int) -> tuple[DistanceVector, list]:
    """Single-source shortest distances and a predecessor array.

    Unreachable vertices keep ``INF`` and a ``None`` predecessor; so does the
    source itself.
    """
    dist, pred, _ = _run(graph, source)
    return DistanceVector(tuple(dist), source), pred


def _walk_back(pred, source, dest) -> list[int]:
    out = [dest]
    while out[-1] != source:
        out.append(pred[out[-1]])
    out.reverse()
    return out


def path_cost(graph: VectorGraph, vertices: Sequence[int]) -> float:
    return float(sum(graph.weight(i, j) for i, j in zip(vertices, vertices[1:])))


def shortest_path(graph: VectorGraph, source: int, dest: int) -> Path:
    if not 0 <= dest < graph.vertex_count:
        raise IndexError(f"dest {dest} out of range")
    dist, pred, _ = _run(graph, source, target=dest)
    if dist[dest] == INF:
        raise NoPath(f"no path from {graph.labels[source]} to {graph.labels[dest]}")
    vs = _walk_back(pred, source, dest)
    return Path(tuple(vs), path_cost(graph, vs), tuple(graph.labels[v] for v in vs))


def reverse_path(path: Path, graph: VectorGraph) -> Path:
    """Same vertices in the opposite order, costed on the reverse arcs."""
    vs = path.vertices[::-1]
    for i, j in zip(vs, vs[1:]):
        if graph.weight(i, j) == INF:
            raise AsymmetricArc(f"arc {i}->{j} missing, cannot reverse")
    return Path(vs, path_cost(graph, vs), path.labels[::-1])


def grid_count(path: Path, grid: GridMap) -> GridCount:
    """Row-to-row and column-to-column move counts along a grid path."""
    if len(path.labels) != len(path.vertices):
        raise NotGridPath("path carries no cell labels")
    for lab in path.labels:
        if not (isinstance(lab, tuple) and len(lab) == 2 and grid.in_bounds(lab)):
            raise NotGridPath(f"vertex label {lab!r} is not a cell of the map")
    rows = cols = 0
    for (r0, c0), (r1, c1) in zip(path.labels, path.labels[1:]):
        rows += abs(r1 - r0)
        cols += abs(c1 - c0)
    return GridCount(rows, cols)


def cell_path(graph: VectorGraph, source: CellCoord, dest: CellCoord) -> Path:
    """Shortest path between two labelled cells."""
    return shortest_path(graph, locate_vertex(graph, source), locate_vertex(graph, dest))
