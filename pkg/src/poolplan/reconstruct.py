"""Path extraction by climbing the activity gradient.

On a valid activity map every covered free cell that is not a source has
an 8-neighbour exactly one higher, so climbing always reaches a source in
exactly as many steps as the cell's hop distance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .grid import Coord, GridMap, SourceSet
from .oracle import CornerRule, diagonal_allowed
from .propagate import ActivityMap

# Neighbour order for the Manhattan climb: left, right, up, down.
MANHATTAN_ORDER = ((0, -1), (0, 1), (-1, 0), (1, 0))
_DIAGONALS = ((-1, -1), (-1, 1), (1, -1), (1, 1))
_EIGHT = tuple((dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0))


class ReconstructionError(ValueError):
    pass


class UncoveredTarget(ReconstructionError):
    def __init__(self, target: Coord):
        super().__init__(f"uncovered target {tuple(target)}: increase L or target unreachable")
        self.target = target


@dataclass(frozen=True)
class Path:
    """Points from the target (first) to a source (last)."""

    points: tuple[Coord, ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def target(self) -> Coord:
        return self.points[0]

    @property
    def source(self) -> Coord:
        return self.points[-1]


@dataclass(frozen=True)
class PathMetrics:
    steps: int
    euclidean_length: float
    axis_moves: int
    diagonal_moves: int


def make_path(points: Sequence[tuple[int, int]]) -> Path:
    return Path(tuple(Coord(int(r), int(c)) for r, c in points))


def _check_target(activity: ActivityMap, grid: GridMap, target: tuple[int, int]) -> Coord:
    if activity.shape != grid.shape:
        raise ReconstructionError(f"activity shape {activity.shape} does not match grid {grid.shape}")
    t = Coord(int(target[0]), int(target[1]))
    if not grid.in_bounds(t):
        raise ReconstructionError(f"target {tuple(t)} is out of bounds")
    if grid.is_obstacle(t):
        raise ReconstructionError(f"target {tuple(t)} lies on an obstacle")
    if activity.values[t] <= 0:
        raise UncoveredTarget(t)
    return t


def _inconsistent(cell: Coord, value: int) -> ReconstructionError:
    return ReconstructionError(
        f"internal inconsistency: no neighbour of {tuple(cell)} exceeds activity {value}"
    )


def reconstruct_simple(
    activity: ActivityMap,
    grid: GridMap,
    sources: SourceSet,
    target: tuple[int, int],
    seed: int = 0,
) -> Path:
    """Greedy 8-neighbour ascent; ties are broken at random by ``seed``."""
    t = _check_target(activity, grid, target)
    vals = activity.values
    h, w = vals.shape
    rng = random.Random(seed)
    cur = t
    points = [cur]
    while cur not in sources:
        r, c = cur
        v = int(vals[r, c])
        best = v
        cands: list[Coord] = []
        for dr, dc in _EIGHT:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w:
                nv = int(vals[rr, cc])
                if nv > best:
                    best, cands = nv, [Coord(rr, cc)]
                elif nv == best and cands:
                    cands.append(Coord(rr, cc))
        if best != v + 1:
            raise _inconsistent(cur, v)
        cur = cands[rng.randrange(len(cands))] if len(cands) > 1 else cands[0]
        points.append(cur)
    return Path(tuple(points))


def reconstruct_euclidean(
    activity: ActivityMap,
    grid: GridMap,
    sources: SourceSet,
    target: tuple[int, int],
    corner: CornerRule = "permissive",
) -> Path:
    """Manhattan gradient climb followed by :func:`straighten`.

    Each step takes the first (left, right, up, down) neighbour with the
    highest activity. When no axis neighbour is higher, a level axis move
    is taken only if the cell it reaches has an axis neighbour one higher
    that is diagonal to the current cell; both moves are then taken, and
    straightening turns the corner they form into one diagonal. If no such
    move exists (the gradient continues only through a diagonal gap) the
    step falls back to the first higher diagonal neighbour.
    """
    t = _check_target(activity, grid, target)
    vals = activity.values
    h, w = vals.shape
    cur = t
    raw = [cur]
    while cur not in sources:
        r, c = cur
        v = int(vals[r, c])
        best = -1
        nxt: Coord | None = None
        for dr, dc in MANHATTAN_ORDER:
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and int(vals[rr, cc]) > best:
                best, nxt = int(vals[rr, cc]), Coord(rr, cc)
        if best != v + 1:
            pair = _level_corner(vals, cur, v)
            if pair is not None:
                raw.append(pair[0])
                nxt = pair[1]
            else:
                nxt = _diagonal_fallback(vals, cur, v)
                if nxt is None:
                    raise _inconsistent(cur, v)
        cur = nxt
        raw.append(cur)
    return straighten(Path(tuple(raw)), grid, corner)


def _level_corner(vals, cur: Coord, v: int) -> tuple[Coord, Coord] | None:
    h, w = vals.shape
    r, c = cur
    for dr, dc in MANHATTAN_ORDER:
        rr, cc = r + dr, c + dc
        if not (0 <= rr < h and 0 <= cc < w) or int(vals[rr, cc]) != v:
            continue
        # perpendicular continuation from the level cell
        for pr, pc in ((dc, dr), (-dc, -dr)):
            r2, c2 = rr + pr, cc + pc
            if 0 <= r2 < h and 0 <= c2 < w and int(vals[r2, c2]) == v + 1:
                return Coord(rr, cc), Coord(r2, c2)
    return None


def _diagonal_fallback(vals, cur: Coord, v: int) -> Coord | None:
    h, w = vals.shape
    r, c = cur
    for dr, dc in _DIAGONALS:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and int(vals[rr, cc]) == v + 1:
            return Coord(rr, cc)
    return None


def straighten(path: Path, grid: GridMap | None = None, corner: CornerRule = "strict") -> Path:
    """Drop interior points whose neighbours on the path are diagonal to each other.

    Passes run left to right against the points kept so far and repeat
    until nothing changes. With a grid and ``corner="strict"`` a point is
    kept if the shortcut would squeeze between two corner-touching
    obstacles.
    """
    pts = list(path.points)
    if len(pts) < 3:
        return path
    changed = True
    while changed:
        changed = False
        kept = [pts[0]]
        for i in range(1, len(pts) - 1):
            a, b = kept[-1], pts[i + 1]
            dr, dc = b[0] - a[0], b[1] - a[1]
            if abs(dr) == 1 and abs(dc) == 1 and (
                grid is None or diagonal_allowed(grid, a[0], a[1], dr, dc, corner)
            ):
                changed = True
                continue
            kept.append(pts[i])
        kept.append(pts[-1])
        pts = kept
    return Path(tuple(pts))


def path_metrics(path: Path) -> PathMetrics:
    axis = diag = 0
    for a, b in zip(path.points, path.points[1:]):
        dr, dc = abs(b[0] - a[0]), abs(b[1] - a[1])
        if max(dr, dc) != 1:
            raise ReconstructionError(f"non-unit move {tuple(a)} -> {tuple(b)}")
        if dr and dc:
            diag += 1
        else:
            axis += 1
    return PathMetrics(axis + diag, axis + diag * math.sqrt(2.0), axis, diag)
