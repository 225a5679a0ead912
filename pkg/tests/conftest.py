from __future__ import annotations

import pathlib

import numpy as np
import pytest

from poolplan.grid import GridMap, make_sources
from poolplan.mapio import Scene, parse_ascii_scene

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fig2_scene() -> Scene:
    """9x9 maze with a centre source. Stand-in for the pictured maze, not a copy."""
    return parse_ascii_scene((FIXTURES / "fig2_maze.txt").read_bytes())


def four_obstacle_scene() -> Scene:
    """100x100 map with four 20x20 square obstacles in a 2x2 arrangement.

    Source near the bottom-left corner; targets at the other corners, the
    centre and the edge midpoints.
    """
    n = 100
    occ = np.zeros((n, n), dtype=bool)
    for r0 in (20, 60):
        for c0 in (20, 60):
            occ[r0 : r0 + 20, c0 : c0 + 20] = True
    grid = GridMap(occ)
    targets = ((4, 4), (4, 95), (95, 95), (50, 50), (4, 50), (50, 4), (50, 95), (95, 50))
    return Scene(grid, make_sources(grid, [(95, 4)]), tuple(targets))


def city_grid(height: int, width: int, seed: int, block: int = 12, street: int = 3) -> GridMap:
    """Street-network stand-in for a city map: blocks separated by streets.

    A fraction of blocks get interior courtyards and some street segments
    are closed, so routes are not trivially straight.
    """
    rng = np.random.default_rng(seed)
    occ = np.ones((height, width), dtype=bool)
    pitch = block + street
    for r in range(0, height, pitch):
        occ[r : r + street, :] = False
    for c in range(0, width, pitch):
        occ[:, c : c + street] = False
    # close some street segments
    for r in range(0, height, pitch):
        for c in range(street, width, pitch):
            if rng.random() < 0.15 and c + block // 2 < width:
                occ[r : r + street, c + block // 2] = True
    for c in range(0, width, pitch):
        for r in range(street, height, pitch):
            if rng.random() < 0.15 and r + block // 2 < height:
                occ[r + block // 2, c : c + street] = True
    # open some courtyards / plazas
    for r in range(street, height, pitch):
        for c in range(street, width, pitch):
            if rng.random() < 0.1:
                occ[r + 2 : r + block - 2, c + 2 : c + block - 2] = False
    return GridMap(occ)


@pytest.fixture
def fig2():
    return fig2_scene()


@pytest.fixture
def four_obstacle():
    return four_obstacle_scene()
