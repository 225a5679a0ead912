"""Activity-map generation by repeated 3x3 max pooling.

Each layer takes the 3x3 maximum around every cell (zero padded), adds one
at source cells and forces obstacle cells to zero. After ``L`` layers every
free cell holds ``max(0, L + 1 - d)`` where ``d`` is its 8-connected hop
distance to the nearest source.

The production kernel represents obstacles as a mask. ``propagate_reference``
keeps the original signed formulation, where obstacles carry the most
negative integer and a rectifier clamps them back to zero, and exists to be
compared against the production kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.ndimage import maximum_filter

from . import _kernels
from .grid import GridMap, SourceSet

Mode = Literal["batched", "iterative"]
MODES: tuple[str, ...] = ("batched", "iterative")

INT32_MAX = int(np.iinfo(np.int32).max)
#: Layer counts at or above this would overflow 32-bit activity values.
MAX_LAYERS = INT32_MAX


class PropagationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ActivityMap:
    values: np.ndarray
    layers_applied: int

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.int32, copy=True)
        if v.ndim != 2:
            raise PropagationError(f"activity must be 2-D, got shape {v.shape}")
        if self.layers_applied < 0:
            raise PropagationError("layers_applied must be >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, c: tuple[int, int]) -> int:
        return int(self.values[c[0], c[1]])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActivityMap):
            return NotImplemented
        return self.layers_applied == other.layers_applied and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class PropagationConfig:
    layers: int | Literal["auto"] = "auto"
    mode: Mode = "batched"
    auto_cap: int = 1024

    def __post_init__(self) -> None:
        if self.layers != "auto" and (not isinstance(self.layers, int) or self.layers < 1):
            raise PropagationError(f"layers must be a positive integer or 'auto', got {self.layers!r}")
        if self.mode not in MODES:
            raise PropagationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.auto_cap < 1:
            raise PropagationError(f"auto_cap must be >= 1, got {self.auto_cap}")


class AutoResult(NamedTuple):
    activity: ActivityMap
    layers_used: int
    cause: str  # "covered" | "stalled" | "cap"


class LayerBound(NamedTuple):
    worst_case: int
    heuristic_low: int
    heuristic_high: int


def _check_shape(activity_shape: tuple[int, int], grid: GridMap) -> None:
    if tuple(activity_shape) != grid.shape:
        raise PropagationError(
            f"activity shape {tuple(activity_shape)} does not match grid shape {grid.shape}"
        )


def _check_layers(layers: int) -> None:
    if not isinstance(layers, (int, np.integer)) or layers < 1:
        raise PropagationError(f"layer count must be an integer >= 1, got {layers!r}")
    if layers >= MAX_LAYERS:
        raise PropagationError(f"layer count {layers} exceeds the 32-bit value bound ({MAX_LAYERS - 1})")


def source_map(grid: GridMap, sources: SourceSet) -> ActivityMap:
    """The zero-layer map: 1 at sources, 0 elsewhere."""
    return ActivityMap(sources.mask(grid.shape).astype(np.int32), 0)


def propagate_layer(activity: ActivityMap, grid: GridMap, sources: SourceSet) -> ActivityMap:
    _check_shape(activity.shape, grid)
    free, src = _kernels.as_kernel_inputs(grid.occupancy, sources.mask(grid.shape))
    cur = np.ascontiguousarray(activity.values, dtype=np.int32)
    out = np.empty_like(cur)
    _kernels.layer(cur, out, free, src)
    return ActivityMap(out, activity.layers_applied + 1)


def propagate(
    grid: GridMap,
    sources: SourceSet,
    layers: int,
    mode: Mode = "batched",
    threads: int | None = None,
) -> ActivityMap:
    """Run ``layers`` propagation layers starting from the source map.

    ``batched`` runs every layer inside one compiled call, swapping two
    buffers. ``iterative`` returns to Python after each layer and hands a
    fresh :class:`ActivityMap` to the next call. Outputs are identical.
    """
    _check_layers(layers)
    if mode not in MODES:
        raise PropagationError(f"mode must be one of {MODES}, got {mode!r}")
    _kernels.set_threads(threads)
    if mode == "iterative":
        act = source_map(grid, sources)
        for _ in range(layers):
            act = propagate_layer(act, grid, sources)
        return act
    free, src = _kernels.as_kernel_inputs(grid.occupancy, sources.mask(grid.shape))
    cur = src.copy()
    scratch = np.empty_like(cur)
    final = _kernels.run_layers(cur, scratch, free, src, int(layers))
    return ActivityMap(final, int(layers))


def propagate_auto(
    grid: GridMap,
    sources: SourceSet,
    auto_cap: int,
    threads: int | None = None,
) -> AutoResult:
    """Add layers until every reachable free cell is nonzero.

    Stops when no free cell is zero (``covered``), when a layer fails to
    shrink the set of zero free cells (``stalled``: the rest is unreachable;
    that last layer is discarded), or after ``auto_cap`` layers (``cap``).
    """
    if auto_cap < 1:
        raise PropagationError(f"auto_cap must be >= 1, got {auto_cap}")
    if auto_cap >= MAX_LAYERS:
        raise PropagationError(f"auto_cap {auto_cap} exceeds the 32-bit value bound")
    _kernels.set_threads(threads)
    free, src = _kernels.as_kernel_inputs(grid.occupancy, sources.mask(grid.shape))
    cur = src.copy()
    nxt = np.empty_like(cur)
    zeros = int(((cur == 0) & (free == 1)).sum())
    if zeros == 0:
        return AutoResult(ActivityMap(cur, 0), 0, "covered")
    for k in range(1, auto_cap + 1):
        z = int(_kernels.layer(cur, nxt, free, src))
        if z == 0:
            return AutoResult(ActivityMap(nxt, k), k, "covered")
        if z == zeros:
            return AutoResult(ActivityMap(cur, k - 1), k - 1, "stalled")
        zeros = z
        cur, nxt = nxt, cur
    return AutoResult(ActivityMap(cur, auto_cap), auto_cap, "cap")


def propagate_reference(grid: GridMap, sources: SourceSet, layers: int) -> ActivityMap:
    """Signed-sentinel formulation, kept deliberately literal.

    Obstacles hold the most negative int32 in the environment map. Every
    layer: 3x3 max pool with zero padding, add environment and source maps,
    rectify. Obstacle cells end each layer below zero before rectification
    as long as ``layers + 1 < INT32_MAX``, which is enforced.
    """
    if not isinstance(layers, (int, np.integer)) or layers < 0:
        raise PropagationError(f"layer count must be an integer >= 0, got {layers!r}")
    if layers + 1 >= INT32_MAX:
        raise PropagationError(f"layer count {layers} would overflow the int32 sentinel arithmetic")
    env = np.where(grid.occupancy, np.iinfo(np.int32).min, 0).astype(np.int32)
    src = sources.mask(grid.shape).astype(np.int32)
    act = src.copy()
    for _ in range(layers):
        pooled = maximum_filter(act, size=3, mode="constant", cval=0)
        act = np.maximum(pooled + env + src, 0).astype(np.int32)
    return ActivityMap(act, int(layers))


def layer_bound(grid: GridMap) -> LayerBound:
    """Worst-case and typical layer counts for a grid of this size."""
    n, m = grid.height, grid.width
    big, small = max(n, m), min(n, m)
    worst = big * ((small + 1) // 2) + small // 2
    return LayerBound(worst, math.ceil(1.5 * big), 2 * big)
