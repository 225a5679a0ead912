import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poolplan.grid import build_grid, make_sources, random_free_cells, random_maze
from poolplan.oracle import bfs_multi_source
from poolplan.propagate import propagate
from poolplan.reconstruct import (
    ReconstructionError,
    UncoveredTarget,
    make_path,
    path_metrics,
    reconstruct_euclidean,
    reconstruct_simple,
    straighten,
)

SQ2 = math.sqrt(2)


def assert_valid_path(p, grid, sources):
    assert p.points[-1] in sources
    for a, b in zip(p.points, p.points[1:]):
        assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
    assert not any(grid.is_obstacle(q) for q in p.points)


def center9():
    g = build_grid(9, 9)
    s = make_sources(g, [(4, 4)])
    return g, s, propagate(g, s, 4)


def test_simple_corner_to_center():
    g, s, a = center9()
    for seed in range(5):
        p = reconstruct_simple(a, g, s, (0, 0), seed)
        assert path_metrics(p).steps == 4
        assert_valid_path(p, g, s)


def test_simple_seeds_vary_sequence_not_length():
    g, s, a = center9()
    paths = {reconstruct_simple(a, g, s, (0, 2), seed).points for seed in range(20)}
    assert len(paths) > 1
    assert {len(p) - 1 for p in paths} == {4}


def test_simple_fig2_all_targets(fig2):
    a = propagate(fig2.grid, fig2.sources, 9)
    d = bfs_multi_source(fig2.grid, fig2.sources)
    for r, c in np.argwhere(~fig2.grid.occupancy):
        for seed in (0, 1):
            p = reconstruct_simple(a, fig2.grid, fig2.sources, (r, c), seed)
            assert len(p) - 1 == d[r, c]
            assert_valid_path(p, fig2.grid, fig2.sources)


def test_uncovered_target():
    g = build_grid(9, 1)
    s = make_sources(g, [(0, 0)])
    a = propagate(g, s, 1)
    with pytest.raises(UncoveredTarget, match="increase L or target unreachable"):
        reconstruct_simple(a, g, s, (0, 8))
    with pytest.raises(UncoveredTarget):
        reconstruct_euclidean(a, g, s, (0, 8))


def test_target_on_obstacle_or_outside():
    g = build_grid(3, 3, [(0, 2)])
    s = make_sources(g, [(0, 0)])
    a = propagate(g, s, 3)
    with pytest.raises(ReconstructionError, match="obstacle"):
        reconstruct_simple(a, g, s, (0, 2))
    with pytest.raises(ReconstructionError, match="out of bounds"):
        reconstruct_euclidean(a, g, s, (3, 0))


def test_euclidean_empty_diagonal():
    g = build_grid(5, 5)
    s = make_sources(g, [(0, 0)])
    a = propagate(g, s, 6)
    p = reconstruct_euclidean(a, g, s, (2, 2))
    assert p.points == ((2, 2), (1, 1), (0, 0))
    m = path_metrics(p)
    assert (m.steps, m.diagonal_moves) == (2, 2)
    assert m.euclidean_length == pytest.approx(2 * SQ2)


def test_euclidean_mixed_empty():
    g = build_grid(8, 8)
    s = make_sources(g, [(0, 0)])
    a = propagate(g, s, 8)
    m = path_metrics(reconstruct_euclidean(a, g, s, (5, 2)))
    assert (m.axis_moves, m.diagonal_moves) == (3, 2)


def test_euclidean_diagonal_only_passage():
    # the only way from (3, 3) to (0, 0) squeezes between (1, 2) and (2, 1)
    g = build_grid(4, 4, [(0, 2), (1, 2), (2, 0), (2, 1)])
    s = make_sources(g, [(0, 0)])
    a = propagate(g, s, 6)
    p = reconstruct_euclidean(a, g, s, (3, 3))
    assert p.points == ((3, 3), (2, 2), (1, 1), (0, 0))
    assert len(p) - 1 == bfs_multi_source(g, s)[3, 3]


def test_euclidean_multi_source_stops_at_first_source():
    g = build_grid(7, 1)
    s = make_sources(g, [(0, 0), (0, 3)])
    a = propagate(g, s, 6)
    assert reconstruct_euclidean(a, g, s, (0, 6)).points[-1] == (0, 3)


def test_straighten_examples():
    assert straighten(make_path([(0, 0), (0, 1), (1, 1)])).points == ((0, 0), (1, 1))
    assert straighten(make_path([(0, 0), (0, 1), (0, 2)])).points == ((0, 0), (0, 1), (0, 2))
    stair = make_path([(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)])
    assert straighten(stair).points == ((0, 0), (1, 1), (2, 2))
    short = make_path([(0, 0), (1, 1)])
    assert straighten(short) == short


def test_straighten_strict_keeps_squeeze():
    g = build_grid(2, 2, [(0, 1), (1, 0)])
    # a contrived corner whose shortcut would pass between the two obstacles
    p = make_path([(0, 0), (0, 0), (1, 1)])
    assert straighten(p, g, "strict").points == p.points
    assert straighten(p, g, "permissive").points == ((0, 0), (1, 1))


def test_path_metrics_examples():
    assert path_metrics(make_path([(0, 0)])) == path_metrics(make_path([(5, 5)]))
    m0 = path_metrics(make_path([(0, 0)]))
    assert (m0.steps, m0.euclidean_length) == (0, 0.0)
    m1 = path_metrics(make_path([(0, 0), (1, 1)]))
    assert (m1.steps, m1.euclidean_length) == (1, pytest.approx(SQ2))
    m2 = path_metrics(make_path([(0, 0), (0, 1), (1, 2)]))
    assert (m2.steps, m2.euclidean_length) == (2, pytest.approx(1 + SQ2))
    with pytest.raises(ReconstructionError):
        path_metrics(make_path([(0, 0), (0, 2)]))


@st.composite
def random_scene(draw):
    seed = draw(st.integers(0, 100_000))
    density = draw(st.sampled_from([0.0, 0.1, 0.3, 0.45]))
    h, w = draw(st.integers(2, 24)), draw(st.integers(2, 24))
    g = random_maze(w, h, density, seed)
    if g.free.sum() == 0:
        g = build_grid(w, h)
    s = make_sources(g, random_free_cells(g, draw(st.integers(1, 4)), seed))
    return g, s


@settings(max_examples=60, deadline=None)
@given(scene=random_scene(), seeds=st.lists(st.integers(0, 1000), min_size=2, max_size=3))
def test_simple_is_step_optimal(scene, seeds):
    g, s = scene
    L = 2 * max(g.shape)
    a = propagate(g, s, L)
    d = bfs_multi_source(g, s).distance
    for r, c in np.argwhere(a.values > 0):
        for seed in seeds:
            p = reconstruct_simple(a, g, s, (r, c), seed)
            assert len(p) - 1 == d[r, c]
            assert_valid_path(p, g, s)


@settings(max_examples=60, deadline=None)
@given(scene=random_scene())
def test_euclidean_paths_valid_and_hop_optimal(scene):
    g, s = scene
    a = propagate(g, s, 2 * max(g.shape))
    d = bfs_multi_source(g, s).distance
    for r, c in np.argwhere(a.values > 0):
        p = reconstruct_euclidean(a, g, s, (r, c))
        assert_valid_path(p, g, s)
        assert len(p) - 1 == d[r, c]
        assert p.points[0] == (r, c)


@settings(max_examples=100)
@given(moves=st.lists(st.sampled_from([(0, 1), (1, 0), (1, 1), (0, -1), (-1, 0), (1, -1)]), max_size=30))
def test_straighten_idempotent_and_shorter(moves):
    pts = [(0, 0)]
    for dr, dc in moves:
        pts.append((pts[-1][0] + dr, pts[-1][1] + dc))
    p = make_path(pts)
    once = straighten(p)
    assert straighten(once) == once
    assert once.points[0] == p.points[0] and once.points[-1] == p.points[-1]
    assert path_metrics(once).euclidean_length <= path_metrics(p).euclidean_length + 1e-9
