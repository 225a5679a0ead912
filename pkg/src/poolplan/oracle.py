"""Ground-truth distances and checkers.

Nothing here touches the max-pool kernel: distances come from a plain
queue-based BFS and a heap-based Dijkstra, so agreement with the activity
maps is evidence rather than tautology.

Octile distances are tracked exactly as ``axis + diag * sqrt(2)`` with
integer move counts. Floats are only used to order the heap; two distinct
values of that form with counts below ~1e6 differ by far more than float
resolution, so the ordering is exact at any grid size we accept.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .grid import Coord, GridMap, SourceSet
from .propagate import ActivityMap

UNREACHABLE = -1
SQRT2 = math.sqrt(2.0)
#: Absolute tolerance for real-valued length comparisons.
LENGTH_TOL = 1e-9

CornerRule = Literal["strict", "permissive"]
CORNER_RULES: tuple[str, ...] = ("strict", "permissive")

_AXIS = ((0, -1), (0, 1), (-1, 0), (1, 0))
_DIAG = ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True, eq=False)
class DistanceMap:
    """Per-cell distance to the nearest source.

    ``metric`` is ``"hops"`` (integer, ``UNREACHABLE`` = -1) or ``"octile"``
    (float, ``inf`` when unreachable). Octile maps also carry the exact
    axis/diagonal move counts of one shortest path.
    """

    distance: np.ndarray
    metric: str
    axis_moves: np.ndarray | None = None
    diag_moves: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.distance.shape

    def reachable(self) -> np.ndarray:
        if self.metric == "hops":
            return self.distance != UNREACHABLE
        return np.isfinite(self.distance)

    def __getitem__(self, c: tuple[int, int]):
        v = self.distance[c[0], c[1]]
        return int(v) if self.metric == "hops" else float(v)


def diagonal_allowed(grid: GridMap, r: int, c: int, dr: int, dc: int, corner: CornerRule) -> bool:
    """Whether a diagonal move from (r, c) by (dr, dc) is legal.

    ``strict`` forbids squeezing between two obstacles that touch at a
    corner; ``permissive`` allows any diagonal between free cells.
    """
    if corner == "permissive":
        return True
    occ = grid.occupancy
    return not (occ[r + dr, c] and occ[r, c + dc])


def bfs_multi_source(grid: GridMap, sources: SourceSet) -> DistanceMap:
    """8-connected hop distance to the nearest source."""
    h, w = grid.shape
    occ = grid.occupancy
    dist = np.full((h, w), UNREACHABLE, dtype=np.int64)
    q: deque[tuple[int, int]] = deque()
    for r, c in sources:
        dist[r, c] = 0
        q.append((r, c))
    while q:
        r, c = q.popleft()
        nd = dist[r, c] + 1
        for dr in (-1, 0, 1):
            rr = r + dr
            if rr < 0 or rr >= h:
                continue
            for dc in (-1, 0, 1):
                cc = c + dc
                if cc < 0 or cc >= w or occ[rr, cc] or dist[rr, cc] != UNREACHABLE:
                    continue
                dist[rr, cc] = nd
                q.append((rr, cc))
    return DistanceMap(dist, "hops")


def dijkstra_octile(grid: GridMap, sources: SourceSet, corner: CornerRule = "permissive") -> DistanceMap:
    """Shortest distances with axis moves costing 1 and diagonals sqrt(2)."""
    h, w = grid.shape
    occ = grid.occupancy
    best_a = np.full((h, w), -1, dtype=np.int64)
    best_b = np.full((h, w), -1, dtype=np.int64)
    done = np.zeros((h, w), dtype=bool)
    heap: list[tuple[float, int, int, int, int]] = []
    for r, c in sources:
        best_a[r, c] = 0
        best_b[r, c] = 0
        heap.append((0.0, 0, 0, r, c))
    heapq.heapify(heap)
    while heap:
        _, a, b, r, c = heapq.heappop(heap)
        if done[r, c]:
            continue
        done[r, c] = True
        for moves, da, db in ((_AXIS, 1, 0), (_DIAG, 0, 1)):
            for dr, dc in moves:
                rr, cc = r + dr, c + dc
                if rr < 0 or rr >= h or cc < 0 or cc >= w or occ[rr, cc] or done[rr, cc]:
                    continue
                if db and not diagonal_allowed(grid, r, c, dr, dc, corner):
                    continue
                na, nb = a + da, b + db
                oa, ob = best_a[rr, cc], best_b[rr, cc]
                if oa < 0 or octile_less(na, nb, int(oa), int(ob)):
                    best_a[rr, cc] = na
                    best_b[rr, cc] = nb
                    heapq.heappush(heap, (na + nb * SQRT2, na, nb, rr, cc))
    reach = best_a >= 0
    dist = np.where(reach, best_a + best_b * SQRT2, np.inf)
    return DistanceMap(dist, "octile", best_a, best_b)


def octile_less(a1: int, b1: int, a2: int, b2: int) -> bool:
    """Exact test of ``a1 + b1*sqrt2 < a2 + b2*sqrt2``."""
    return octile_sign(a2 - a1, b2 - b1) > 0


def octile_sign(a: int, b: int) -> int:
    """Sign of ``a + b*sqrt2`` for integers, computed exactly."""
    if a >= 0 and b >= 0:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 and b <= 0:
        return -1
    # opposite signs: compare a^2 with 2 b^2
    lhs, rhs = a * a, 2 * b * b
    if a > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


@dataclass
class ValidationReport:
    """Findings from checking activity maps and paths against the oracles.

    ``step_optimality`` and ``activity_violations`` are hard failures; the
    Euclidean excess is only ever a finding.
    """

    activity_violations: list[Coord] = field(default_factory=list)
    step_optimality: dict[Coord, bool] = field(default_factory=dict)
    euclidean_excess: dict[Coord, float] = field(default_factory=dict)
    nearest_source_agreement: dict[Coord, bool] = field(default_factory=dict)

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        self.activity_violations.extend(other.activity_violations)
        self.step_optimality.update(other.step_optimality)
        self.euclidean_excess.update(other.euclidean_excess)
        self.nearest_source_agreement.update(other.nearest_source_agreement)
        return self

    @property
    def step_failures(self) -> list[Coord]:
        return [t for t, ok in self.step_optimality.items() if not ok]

    @property
    def nearest_failures(self) -> list[Coord]:
        return [t for t, ok in self.nearest_source_agreement.items() if not ok]

    @property
    def ok(self) -> bool:
        return not self.activity_violations and not self.step_failures and not self.nearest_failures

    def to_dict(self, sample: int = 20) -> dict:
        positive = {t: e for t, e in self.euclidean_excess.items() if e > LENGTH_TOL}
        excess = list(self.euclidean_excess.values())
        return {
            "activity_law_violations": {
                "count": len(self.activity_violations),
                "sample": [list(c) for c in self.activity_violations[:sample]],
            },
            "step_optimality": {
                "checked": len(self.step_optimality),
                "failures": [list(t) for t in self.step_failures],
            },
            "nearest_source_agreement": {
                "checked": len(self.nearest_source_agreement),
                "failures": [list(t) for t in self.nearest_failures],
            },
            "euclidean_excess": {
                "checked": len(excess),
                "positive": len(positive),
                "max": round(max(excess), 12) if excess else 0.0,
                "mean": round(sum(excess) / len(excess), 12) if excess else 0.0,
                "positive_targets": [[list(t), round(e, 12)] for t, e in sorted(positive.items())[:sample]],
            },
        }


def check_activity(activity: ActivityMap, distmap: DistanceMap, layers: int | None = None) -> ValidationReport:
    """Compare every cell against ``max(0, L + 1 - d)`` (0 where unreachable)."""
    if distmap.metric != "hops":
        raise ValueError("check_activity needs a hop-distance map")
    if activity.shape != distmap.shape:
        raise ValueError(f"activity shape {activity.shape} does not match distance map {distmap.shape}")
    L = activity.layers_applied if layers is None else layers
    d = distmap.distance
    expected = np.where(d == UNREACHABLE, 0, np.maximum(0, L + 1 - d))
    bad = np.argwhere(activity.values != expected)
    return ValidationReport(activity_violations=[Coord(int(r), int(c)) for r, c in bad])


def nearest_sources(grid: GridMap, sources: SourceSet, target: tuple[int, int]) -> tuple[int, set[Coord]]:
    """Hop distance from ``target`` to its nearest sources, and which they are.

    Runs a single-source BFS from the target, independent of the
    multi-source map.
    """
    from_target = bfs_multi_source(grid, SourceSet(frozenset({Coord(*target)})))
    best = None
    chosen: set[Coord] = set()
    for s in sources:
        d = from_target[s]
        if d == UNREACHABLE:
            continue
        if best is None or d < best:
            best, chosen = d, {s}
        elif d == best:
            chosen.add(s)
    return (UNREACHABLE if best is None else best), chosen


def check_path(
    path,
    grid: GridMap,
    sources: SourceSet,
    hops: DistanceMap,
    octile: DistanceMap | None = None,
    check_nearest: bool = True,
) -> ValidationReport:
    """Check a reconstructed path against the oracles.

    Records whether its step count equals the BFS hop distance of its
    target, whether it ends at a hop-nearest source, and (given an octile
    map) how much longer it is than the octile shortest distance.
    """
    from .reconstruct import path_metrics

    rep = ValidationReport()
    target = path.points[0]
    m = path_metrics(path)
    d = hops[target]
    rep.step_optimality[target] = d != UNREACHABLE and m.steps == d
    if check_nearest:
        _, nearest = nearest_sources(grid, sources, target)
        rep.nearest_source_agreement[target] = path.points[-1] in nearest
    if octile is not None and octile.axis_moves is not None:
        oa = int(octile.axis_moves[target])
        ob = int(octile.diag_moves[target])
        if oa >= 0:
            da, db = m.axis_moves - oa, m.diagonal_moves - ob
            excess = 0.0 if (da == 0 and db == 0) else da + db * SQRT2
            rep.euclidean_excess[target] = excess
    return rep
