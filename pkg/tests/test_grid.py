import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmcut.errors import InvalidArgumentError
from pmcut.grid import (
    build_grid,
    check_label_map,
    components_of_dormant,
    enumerate_unit_cycles,
    induced_multicut,
    is_multicut,
    relabel_first_visit,
)

from oracles import grid_edges, segments_of


@st.composite
def grid_and_labeling(draw, max_side=5):
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    g = build_grid(m, n)
    x = np.array(draw(st.lists(st.integers(0, 1), min_size=g.n_edges, max_size=g.n_edges)), dtype=np.uint8)
    return g, x


def test_edge_counts_4x4():
    g = build_grid(4, 4)
    assert g.n_edges == 24


def test_single_pixel_has_no_edges():
    assert build_grid(1, 1).n_edges == 0


def test_row_and_column_edge_counts_2x3():
    g = build_grid(2, 3)
    assert (g.n_row_edges, g.n_col_edges) == (4, 3)


@pytest.mark.parametrize("m,n", [(0, 3), (3, 0), (-1, 2)])
def test_zero_dimension_rejected(m, n):
    with pytest.raises(InvalidArgumentError):
        build_grid(m, n)


@pytest.mark.parametrize("m,n", [(1, 1), (1, 5), (4, 1), (3, 4), (6, 7)])
def test_edge_ids_match_documented_order(m, n):
    g = build_grid(m, n)
    expected = grid_edges(m, n)
    assert g.n_edges == len(expected) == m * (n - 1) + (m - 1) * n
    for e, (u, v) in enumerate(expected):
        assert g.endpoints(e) == (u, v)
        assert g.edge_between(u[0] * n + u[1], v[0] * n + v[1]) == e


def test_edge_between_rejects_non_neighbors():
    g = build_grid(3, 3)
    with pytest.raises(InvalidArgumentError):
        g.edge_between(2, 3)  # wraps around a row end


def test_unit_cycles_counts():
    assert len(enumerate_unit_cycles(build_grid(4, 4))) == 9
    assert enumerate_unit_cycles(build_grid(1, 6)) == []
    (cyc,) = enumerate_unit_cycles(build_grid(2, 2))
    assert sorted(cyc) == [0, 1, 2, 3]


@pytest.mark.parametrize("m,n", [(2, 2), (3, 4), (5, 3)])
def test_unit_cycles_bound_squares(m, n):
    g = build_grid(m, n)
    cycles = enumerate_unit_cycles(g)
    assert len(cycles) == (m - 1) * (n - 1)
    assert len({frozenset(c) for c in cycles}) == len(cycles)
    for c in cycles:
        nodes = [p for e in c for p in g.endpoints(e)]
        corners = set(nodes)
        assert len(corners) == 4 and all(nodes.count(p) == 2 for p in corners)
        rows = {p[0] for p in corners}
        cols = {p[1] for p in corners}
        assert max(rows) - min(rows) == 1 and max(cols) - min(cols) == 1


def test_components_extremes():
    g = build_grid(3, 4)
    assert components_of_dormant(g, np.zeros(g.n_edges)).max() == 0
    full = components_of_dormant(g, np.ones(g.n_edges))
    np.testing.assert_array_equal(full, np.arange(12).reshape(3, 4))


def test_components_vertical_edges_active():
    g = build_grid(2, 2)
    x = np.zeros(g.n_edges, dtype=np.uint8)
    x[g.col_edge_ids] = 1
    np.testing.assert_array_equal(components_of_dormant(g, x), [[0, 0], [1, 1]])


def test_induced_multicut_examples():
    g = build_grid(2, 2)
    assert not induced_multicut(g, np.zeros((2, 2), int)).any()
    x = induced_multicut(g, np.array([[0, 0], [1, 1]]))
    assert list(np.flatnonzero(x)) == list(g.col_edge_ids)


def test_components_wrong_length():
    with pytest.raises(InvalidArgumentError):
        components_of_dormant(build_grid(2, 2), np.zeros(3))


@given(grid_and_labeling())
def test_components_match_networkx(case):
    g, x = case
    np.testing.assert_array_equal(components_of_dormant(g, x), segments_of(g.rows, g.cols, x))


@given(grid_and_labeling(max_side=25))
def test_union_find_and_csgraph_paths_agree(case):
    from pmcut.grid import _csgraph_labels, _union_find_labels

    g, x = case
    a = relabel_first_visit(_union_find_labels(g, x < 0.5).reshape(g.shape))
    b = relabel_first_visit(_csgraph_labels(g, x < 0.5).reshape(g.shape))
    np.testing.assert_array_equal(a, b)


@given(grid_and_labeling())
def test_closure_is_idempotent_and_dominated(case):
    g, x = case
    labels = components_of_dormant(g, x)
    xc = induced_multicut(g, labels)
    assert np.all(xc <= x)
    np.testing.assert_array_equal(components_of_dormant(g, xc), labels)
    assert is_multicut(g, xc)
    check_label_map(labels)


@given(grid_and_labeling())
def test_first_visit_order(case):
    g, x = case
    flat = components_of_dormant(g, x).ravel()
    seen = []
    for v in flat:
        if v not in seen:
            seen.append(v)
    assert seen == list(range(len(seen)))


@pytest.mark.parametrize("m,n", [(2, 2), (2, 3), (3, 3)])
def test_multicuts_satisfy_every_simple_cycle_inequality(m, n):
    # exhaustive: all edge vectors, all cycles of the grid graph
    import networkx as nx

    g = build_grid(m, n)
    G = nx.Graph()
    for e in range(g.n_edges):
        G.add_edge(int(g.heads[e]), int(g.tails[e]), id=e)
    cycles = [
        [G.edges[c[k], c[(k + 1) % len(c)]]["id"] for k in range(len(c))]
        for c in nx.simple_cycles(G)
    ]
    assert cycles
    for bits in itertools.product((0, 1), repeat=g.n_edges):
        x = np.array(bits)
        if not is_multicut(g, x):
            continue
        for c in cycles:
            s = x[c].sum()
            assert s != 1


def test_check_label_map_rejections():
    with pytest.raises(InvalidArgumentError):
        check_label_map(np.array([[0, 2]]))
    with pytest.raises(InvalidArgumentError):
        check_label_map(np.array([[0, 1, 0]]))
    with pytest.raises(InvalidArgumentError):
        check_label_map(np.array([[0.0, 1.0]]))
    assert check_label_map(np.array([[0, 1, 0]]), connected=False) == 2


def test_grid_arrays_are_read_only():
    g = build_grid(3, 3)
    with pytest.raises(ValueError):
        g.heads[0] = 5
