import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deliverysim import (INF, BoundsError, ConfigError, EmptyMap, GridMap, NegativeWeight,
                         UnknownLabel, VectorGraph, grid_to_graph, locate_vertex)


def test_two_cell_grid():
    g = grid_to_graph(GridMap(1, 2))
    assert g.vertex_count == 2
    assert g.weight(0, 1) == 1.0 and g.weight(1, 0) == 1.0


def test_obstacle_removes_vertex_and_no_diagonals():
    g = grid_to_graph(GridMap(2, 2, obstacles={(1, 1)}))
    assert g.vertex_count == 3
    a, b = locate_vertex(g, (0, 1)), locate_vertex(g, (1, 0))
    assert g.weight(a, b) == INF


def test_open_3x3_has_24_directed_arcs():
    g = grid_to_graph(GridMap(3, 3))
    assert g.finite_arc_count() == 24


def test_cell_size_is_arc_weight():
    g = grid_to_graph(GridMap(2, 3, cell_size=0.5))
    assert g.weight(0, 1) == 0.5


def test_dynamic_cells_stay_connected():
    g = grid_to_graph(GridMap(3, 3, dynamic_truth={(1, 1)}))
    assert g.vertex_count == 9
    v = locate_vertex(g, (1, 1))
    assert len(g.adjacency[v]) == 4


def test_locate_vertex():
    g = grid_to_graph(GridMap(1, 2))
    assert locate_vertex(g, (0, 1)) == 1
    assert locate_vertex(g, [0, 1]) == 1
    with pytest.raises(UnknownLabel):
        locate_vertex(g, (5, 5))


def test_grid_validation():
    with pytest.raises(ConfigError):
        GridMap(1, 1)
    with pytest.raises(BoundsError):
        GridMap(2, 2, obstacles={(2, 0)})
    with pytest.raises(ConfigError):
        GridMap(2, 2, obstacles={(0, 0)}, dynamic_truth={(0, 0)})
    with pytest.raises(ConfigError):
        GridMap(2, 2, cell_size=0)


def test_all_obstacles_is_empty_map():
    with pytest.raises(EmptyMap):
        grid_to_graph(GridMap(1, 2, obstacles={(0, 0), (0, 1)}))


def test_graph_validation():
    with pytest.raises(NegativeWeight):
        VectorGraph([[0, -1], [-1, 0]])
    with pytest.raises(ConfigError):
        VectorGraph([[0, 1, 2], [1, 0, 3]])
    with pytest.raises(ConfigError):
        VectorGraph([[1, 1], [1, 0]])
    with pytest.raises(ConfigError):
        VectorGraph([[0, math.nan], [1, 0]])
    with pytest.raises(ConfigError):
        VectorGraph([[0, 1], [1, 0]], labels=["a", "a"])


def test_arcs_read_only():
    g = VectorGraph([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        g.arcs[0, 1] = 5


def test_without_vertices_matches_dense_cut():
    g = grid_to_graph(GridMap(3, 4))
    cut = [locate_vertex(g, (1, 1)), locate_vertex(g, (0, 3))]
    h = g.without_vertices(cut)
    dense = np.array(g.arcs)
    for v in cut:
        dense[v, :] = INF
        dense[:, v] = INF
        dense[v, v] = 0.0
    assert np.array_equal(h.arcs, dense)
    # derived graph of a derived graph
    h2 = h.without_vertices([locate_vertex(g, (2, 2))])
    dense[locate_vertex(g, (2, 2)), :] = INF
    dense[:, locate_vertex(g, (2, 2))] = INF
    dense[locate_vertex(g, (2, 2)), locate_vertex(g, (2, 2))] = 0.0
    assert np.array_equal(h2.arcs, dense)
    # source graph untouched
    assert g.finite_arc_count() == 2 * (3 * 3 + 2 * 4)


def test_without_vertices_on_directed_graph():
    g = VectorGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], symmetric=False)
    h = g.without_vertices([1])
    assert h.weight(0, 1) == INF and h.weight(1, 2) == INF
    assert h.weight(2, 0) == 1.0


@given(st.integers(1, 6), st.integers(1, 6), st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5))))
def test_grid_graph_properties(rows, cols, blocked):
    blocked = {c for c in blocked if c[0] < rows and c[1] < cols}
    if rows * cols < 2 or len(blocked) == rows * cols:
        return
    g = grid_to_graph(GridMap(rows, cols, obstacles=blocked))
    a = g.arcs
    assert g.vertex_count == rows * cols - len(blocked)
    assert np.array_equal(a, a.T)
    for i, (r, c) in enumerate(g.labels):
        for j, (r2, c2) in enumerate(g.labels):
            adjacent = abs(r - r2) + abs(c - c2) == 1
            if i != j:
                assert (a[i, j] == 1.0) == adjacent
