import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poolplan.grid import build_grid, make_sources, random_free_cells, random_maze
from poolplan.oracle import (
    UNREACHABLE,
    ValidationReport,
    bfs_multi_source,
    check_activity,
    check_path,
    dijkstra_octile,
    nearest_sources,
    octile_less,
    octile_sign,
)
from poolplan.propagate import ActivityMap, propagate, source_map
from poolplan.reconstruct import make_path, reconstruct_euclidean, reconstruct_simple

SQ2 = math.sqrt(2)


def test_bfs_one_ring():
    g = build_grid(3, 3)
    d = bfs_multi_source(g, make_sources(g, [(1, 1)])).distance
    assert d.tolist() == [[1, 1, 1], [1, 0, 1], [1, 1, 1]]


def test_bfs_two_corners():
    g = build_grid(5, 5)
    d = bfs_multi_source(g, make_sources(g, [(0, 0), (4, 4)])).distance
    ii, jj = np.indices((5, 5))
    cheb_a = np.maximum(ii, jj)
    cheb_b = np.maximum(4 - ii, 4 - jj)
    assert np.array_equal(d, np.minimum(cheb_a, cheb_b))


def test_bfs_walled_off_cell():
    g = build_grid(3, 3, [(0, 1), (1, 0), (1, 1)])
    d = bfs_multi_source(g, make_sources(g, [(2, 2)]))
    assert d[0, 0] == UNREACHABLE
    assert d[0, 2] == 2


def test_bfs_diagonal_squeeze_is_a_move():
    g = build_grid(2, 2, [(0, 1), (1, 0)])
    assert bfs_multi_source(g, make_sources(g, [(0, 0)]))[1, 1] == 1


@pytest.mark.parametrize("cell,expected", [((2, 2), 2 * SQ2), ((0, 3), 3.0), ((1, 2), 1 + SQ2)])
def test_dijkstra_closed_forms(cell, expected):
    g = build_grid(5, 5)
    d = dijkstra_octile(g, make_sources(g, [(0, 0)]))
    assert d[cell] == pytest.approx(expected, abs=1e-12)


def test_dijkstra_exact_counts():
    g = build_grid(6, 6)
    d = dijkstra_octile(g, make_sources(g, [(0, 0)]))
    assert (int(d.axis_moves[1, 2]), int(d.diag_moves[1, 2])) == (1, 1)
    assert (int(d.axis_moves[5, 5]), int(d.diag_moves[5, 5])) == (0, 5)


def test_dijkstra_corner_rule():
    g = build_grid(2, 2, [(0, 1), (1, 0)])
    s = make_sources(g, [(0, 0)])
    assert dijkstra_octile(g, s, "permissive")[1, 1] == pytest.approx(SQ2)
    assert dijkstra_octile(g, s, "strict")[1, 1] == math.inf


@settings(max_examples=40, deadline=None)
@given(h=st.integers(1, 15), w=st.integers(1, 15), data=st.data())
def test_empty_grid_closed_forms(h, w, data):
    g = build_grid(w, h)
    r = data.draw(st.integers(0, h - 1))
    c = data.draw(st.integers(0, w - 1))
    s = make_sources(g, [(r, c)])
    ii, jj = np.indices((h, w))
    dr, dc = abs(ii - r), abs(jj - c)
    assert np.array_equal(bfs_multi_source(g, s).distance, np.maximum(dr, dc))
    octile = np.maximum(dr, dc) + (SQ2 - 1) * np.minimum(dr, dc)
    assert np.allclose(dijkstra_octile(g, s).distance, octile, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), density=st.sampled_from([0.1, 0.3, 0.45]))
def test_bfs_dijkstra_agree_on_reachability(seed, density):
    g = random_maze(24, 20, density, seed)
    s = make_sources(g, random_free_cells(g, 2, seed))
    hops = bfs_multi_source(g, s)
    octile = dijkstra_octile(g, s)
    assert np.array_equal(hops.reachable(), octile.reachable())
    # neighbouring free cells differ by at most one hop
    d = hops.distance
    both = (d[:, 1:] >= 0) & (d[:, :-1] >= 0)
    assert (abs(d[:, 1:] - d[:, :-1])[both] <= 1).all()
    # an octile path with k hops is at least k long and at most k * sqrt2
    reach = hops.reachable()
    assert (octile.distance[reach] >= d[reach] - 1e-9).all()
    assert (octile.distance[reach] <= d[reach] * SQ2 + 1e-9).all()


@given(a=st.integers(-500, 500), b=st.integers(-500, 500))
def test_octile_sign_exact(a, b):
    v = a + b * SQ2
    expected = 0 if (a == 0 and b == 0) else (1 if v > 0 else -1)
    assert octile_sign(a, b) == expected


def test_octile_less():
    assert octile_less(3, 0, 0, 3)  # 3 < 3*sqrt2
    assert not octile_less(3, 0, 3, 0)
    assert octile_less(1, 2, 4, 0)  # 1 + 2.83 < 4


def test_check_activity_clean():
    g = random_maze(32, 32, 0.3, 5)
    s = make_sources(g, random_free_cells(g, 3, 5))
    a = propagate(g, s, 20)
    assert check_activity(a, bfs_multi_source(g, s)).activity_violations == []


def test_check_activity_fault_injection():
    g = build_grid(9, 9)
    s = make_sources(g, [(4, 4)])
    a = propagate(g, s, 3)
    vals = np.array(a.values)
    vals[0, 7] += 1
    rep = check_activity(ActivityMap(vals, 3), bfs_multi_source(g, s))
    assert rep.activity_violations == [(0, 7)]
    assert not rep.ok


def test_check_activity_layer_zero():
    g = build_grid(4, 4)
    s = make_sources(g, [(1, 2)])
    assert check_activity(source_map(g, s), bfs_multi_source(g, s), 0).activity_violations == []


def test_check_activity_shape_mismatch():
    g = build_grid(4, 4)
    s = make_sources(g, [(1, 2)])
    g2 = build_grid(5, 4)
    with pytest.raises(ValueError):
        check_activity(source_map(g, s), bfs_multi_source(g2, make_sources(g2, [(0, 0)])))


def test_check_path_simple_center():
    g = build_grid(9, 9)
    s = make_sources(g, [(4, 4)])
    a = propagate(g, s, 4)
    p = reconstruct_simple(a, g, s, (0, 0))
    rep = check_path(p, g, s, bfs_multi_source(g, s))
    assert rep.step_optimality == {(0, 0): True}
    assert rep.nearest_source_agreement == {(0, 0): True}


def test_check_path_detects_long_path():
    g = build_grid(5, 5)
    s = make_sources(g, [(0, 0)])
    p = make_path([(2, 2), (2, 1), (1, 1), (1, 0), (0, 0)])
    rep = check_path(p, g, s, bfs_multi_source(g, s), dijkstra_octile(g, s))
    assert rep.step_optimality == {(2, 2): False}
    assert rep.euclidean_excess[(2, 2)] == pytest.approx(4 - 2 * SQ2)


def test_check_path_euclidean_four_obstacle(four_obstacle):
    sc = four_obstacle
    a = propagate(sc.grid, sc.sources, 200)
    hops, octile = bfs_multi_source(sc.grid, sc.sources), dijkstra_octile(sc.grid, sc.sources)
    rep = ValidationReport()
    for t in sc.targets:
        rep.merge(check_path(reconstruct_euclidean(a, sc.grid, sc.sources, t), sc.grid, sc.sources, hops, octile))
    assert all(rep.step_optimality.values())
    assert rep.euclidean_excess == {t: 0.0 for t in sc.targets}


def test_nearest_sources_multi():
    g = build_grid(9, 9, [(r, 4) for r in range(8)])
    s = make_sources(g, [(0, 0), (0, 8), (8, 0)])
    d, near = nearest_sources(g, s, (0, 5))
    # the wall forces (0, 0) to route via row 8; (0, 8) is 3 hops away
    assert (d, near) == (3, {(0, 8)})


def test_validation_report_dict():
    rep = ValidationReport()
    rep.euclidean_excess = {(1, 1): 0.0, (2, 2): 0.5}
    rep.step_optimality = {(1, 1): True, (2, 2): False}
    d = rep.to_dict()
    assert d["euclidean_excess"]["positive"] == 1
    assert d["step_optimality"]["failures"] == [[2, 2]]
