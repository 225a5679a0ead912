"""Occupancy grids, coordinates and maze generators.

Coordinates are ``(row, col)`` with row 0 at the top, the same convention
image files use. ``True`` in an occupancy array marks an obstacle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

MAX_DIM = 65_535


class GridError(ValueError):
    """Invalid grid, coordinate or source set."""


class Coord(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class GridMap:
    """Immutable rectangular occupancy grid."""

    occupancy: np.ndarray

    def __post_init__(self) -> None:
        occ = np.array(self.occupancy, dtype=bool, copy=True)
        if occ.ndim != 2:
            raise GridError(f"occupancy must be 2-D, got shape {occ.shape}")
        h, w = occ.shape
        if h < 1 or w < 1:
            raise GridError(f"grid dimensions must be >= 1, got {w}x{h}")
        if h > MAX_DIM or w > MAX_DIM:
            raise GridError(f"grid dimensions must be <= {MAX_DIM}, got {w}x{h}")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.occupancy.shape

    @property
    def free(self) -> np.ndarray:
        return ~self.occupancy

    def in_bounds(self, c: tuple[int, int]) -> bool:
        return 0 <= c[0] < self.height and 0 <= c[1] < self.width

    def is_obstacle(self, c: tuple[int, int]) -> bool:
        return bool(self.occupancy[c[0], c[1]])

    def obstacles(self) -> list[Coord]:
        return [Coord(int(r), int(c)) for r, c in zip(*np.nonzero(self.occupancy))]

    def obstacle_count(self) -> int:
        return int(self.occupancy.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridMap):
            return NotImplemented
        return np.array_equal(self.occupancy, other.occupancy)

    def __hash__(self) -> int:
        return hash((self.shape, self.occupancy.tobytes()))

    def __repr__(self) -> str:
        return f"GridMap({self.width}x{self.height}, obstacles={self.obstacle_count()})"


@dataclass(frozen=True)
class SourceSet:
    """Nonempty set of free, in-bounds source cells of a particular grid."""

    sources: frozenset[Coord]

    def __iter__(self):
        return iter(sorted(self.sources))

    def __len__(self) -> int:
        return len(self.sources)

    def __contains__(self, c: object) -> bool:
        return c in self.sources

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        for r, c in self.sources:
            m[r, c] = True
        return m


def make_sources(grid: GridMap, coords: Iterable[tuple[int, int]]) -> SourceSet:
    """Validate ``coords`` against ``grid`` and build a :class:`SourceSet`.

    Duplicates are rejected rather than silently merged.
    """
    seen: set[Coord] = set()
    for raw in coords:
        c = Coord(int(raw[0]), int(raw[1]))
        if not grid.in_bounds(c):
            raise GridError(f"source {tuple(c)} is out of bounds for {grid.width}x{grid.height} grid")
        if grid.is_obstacle(c):
            raise GridError(f"source {tuple(c)} lies on an obstacle")
        if c in seen:
            raise GridError(f"duplicate source {tuple(c)}")
        seen.add(c)
    if not seen:
        raise GridError("at least one source is required")
    return SourceSet(frozenset(seen))


def build_grid(width: int, height: int, obstacles: Iterable[tuple[int, int]] = ()) -> GridMap:
    if width < 1 or height < 1:
        raise GridError(f"grid dimensions must be >= 1, got {width}x{height}")
    if width > MAX_DIM or height > MAX_DIM:
        raise GridError(f"grid dimensions must be <= {MAX_DIM}, got {width}x{height}")
    occ = np.zeros((height, width), dtype=bool)
    for raw in obstacles:
        r, c = int(raw[0]), int(raw[1])
        if not (0 <= r < height and 0 <= c < width):
            raise GridError(f"obstacle {(r, c)} is out of bounds for {width}x{height} grid")
        occ[r, c] = True
    return GridMap(occ)


def comb_maze(width: int, height: int) -> GridMap:
    """Serpentine worst case: every second row is a wall with a one-cell gap.

    Free rows are the even rows. The first wall row leaves its gap at column
    0, the second at column ``width - 1``, and so on alternately, so the
    corridor starts at (0, width - 1) and snakes down.
    A trailing wall row (even height) keeps its gap so the last corridor
    cell is still part of the single chain.
    """
    if width < 2 or height < 2:
        raise GridError(f"comb maze needs width, height >= 2, got {width}x{height}")
    occ = np.zeros((height, width), dtype=bool)
    for r in range(1, height, 2):
        occ[r, :] = True
        gap = 0 if r % 4 == 1 else width - 1
        occ[r, gap] = False
    return GridMap(occ)


def comb_start(grid: GridMap) -> Coord:
    """Corridor end where :func:`comb_maze` starts its serpentine."""
    return Coord(0, grid.width - 1)


def random_maze(width: int, height: int, obstacle_density: float, seed: int) -> GridMap:
    """Grid with exactly ``round(density * cells)`` obstacles at seeded positions.

    Sampling a fixed count (not per-cell coin flips) keeps the realised
    density within rounding of the request.
    """
    if not 0.0 <= obstacle_density < 1.0:
        raise GridError(f"obstacle_density must be in [0, 1), got {obstacle_density}")
    if width < 1 or height < 1:
        raise GridError(f"grid dimensions must be >= 1, got {width}x{height}")
    n = width * height
    k = int(round(obstacle_density * n))
    rng = np.random.default_rng(seed)
    flat = np.zeros(n, dtype=bool)
    flat[rng.choice(n, size=k, replace=False)] = True
    return GridMap(flat.reshape(height, width))


def random_free_cells(grid: GridMap, count: int, seed: int) -> list[Coord]:
    """Pick up to ``count`` distinct free cells, deterministically in ``seed``."""
    free = np.flatnonzero(grid.free)
    if free.size == 0:
        return []
    rng = np.random.default_rng(seed)
    picks = rng.choice(free, size=min(count, free.size), replace=False)
    return [Coord(int(p // grid.width), int(p % grid.width)) for p in picks]


def neighbors8(c: tuple[int, int], height: int, width: int) -> list[Coord]:
    r0, c0 = c
    out = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            r, cc = r0 + dr, c0 + dc
            if 0 <= r < height and 0 <= cc < width:
                out.append(Coord(r, cc))
    return out
