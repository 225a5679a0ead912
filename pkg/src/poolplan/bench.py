"""Timing harness for the propagation kernel and a linear scaling fit.

Each sample runs one warm-up propagation that is not timed, then
``repeats`` timed ones, and keeps the median and minimum wall-clock time.
"""

from __future__ import annotations

import statistics
import time
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .grid import GridMap, build_grid, make_sources, random_free_cells, random_maze
from .propagate import Mode, propagate


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchSample:
    n: int
    L: int
    mode: str
    threads: int | None
    repeats: int
    median_ms: float | None
    min_ms: float | None
    density: float = 0.0
    skipped: bool = False

    @property
    def spread_ms(self) -> float:
        return 0.0 if self.skipped else self.median_ms - self.min_ms


@dataclass(frozen=True)
class ScalingFit:
    slope_vs_cells: dict[int, float]  # L -> ms per cell (t = a * n^2)
    slope_vs_layers: dict[int, float]  # n -> ms per layer (t = b * L)
    coefficient: float  # ms per cell-layer (t = c * L * n^2)
    max_relative_residual: float

    def to_dict(self) -> dict:
        return {
            "slope_vs_cells": {str(k): v for k, v in sorted(self.slope_vs_cells.items())},
            "slope_vs_layers": {str(k): v for k, v in sorted(self.slope_vs_layers.items())},
            "coefficient_ms": self.coefficient,
            "max_relative_residual": self.max_relative_residual,
        }


def time_propagation(
    grid: GridMap,
    layers: int,
    mode: Mode = "batched",
    threads: int | None = None,
    repeats: int = 3,
    sources=None,
) -> tuple[float, float]:
    """Median and minimum milliseconds over ``repeats`` runs after a warm-up."""
    if repeats < 3:
        raise BenchError(f"repeats must be >= 3, got {repeats}")
    if sources is None:
        sources = make_sources(grid, random_free_cells(grid, 1, 0))
    propagate(grid, sources, layers, mode, threads)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        propagate(grid, sources, layers, mode, threads)
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), min(times)


def run_benchmark(
    sizes: Sequence[int],
    layers: int | None = None,
    layer_ratio: float | None = None,
    mode: Mode = "batched",
    threads: int | None = None,
    repeats: int = 3,
    density: float = 0.0,
    seed: int = 0,
    interleave: bool = False,
) -> list[BenchSample]:
    """Time propagation on square ``n x n`` maps for each ``n`` in ``sizes``.

    Exactly one of ``layers`` (fixed L) or ``layer_ratio`` (L = ratio * n)
    must be given. Maps are empty unless ``density`` is set. With
    ``interleave`` each repeat visits every size in turn, so slow drift in
    machine load is shared across sizes instead of biasing one of them.
    """
    if (layers is None) == (layer_ratio is None):
        raise BenchError("give exactly one of layers or layer_ratio")
    if repeats < 3:
        raise BenchError(f"repeats must be >= 3, got {repeats}")
    for n in sizes:
        if n < 16:
            raise BenchError(f"sizes must be >= 16, got {n}")
    if interleave:
        return _run_interleaved(sizes, layers, layer_ratio, mode, threads, repeats, density, seed)
    samples = []
    for n in sizes:
        L = _layers_for(n, layers, layer_ratio)
        try:
            grid = build_grid(n, n) if density == 0 else random_maze(n, n, density, seed)
            med, lo = time_propagation(grid, L, mode, threads, repeats)
        except MemoryError:
            samples.append(BenchSample(n, L, mode, threads, repeats, None, None, density, skipped=True))
            continue
        samples.append(BenchSample(n, L, mode, threads, repeats, med, lo, density))
    return samples


def _layers_for(n: int, layers: int | None, layer_ratio: float | None) -> int:
    return int(layers) if layers is not None else max(1, int(round(layer_ratio * n)))


def _run_interleaved(sizes, layers, layer_ratio, mode, threads, repeats, density, seed) -> list[BenchSample]:
    cases = []
    for n in sizes:
        L = _layers_for(n, layers, layer_ratio)
        try:
            grid = build_grid(n, n) if density == 0 else random_maze(n, n, density, seed)
            sources = make_sources(grid, random_free_cells(grid, 1, 0))
            propagate(grid, sources, L, mode, threads)
        except MemoryError:
            grid = sources = None
        cases.append((n, L, grid, sources))
    times: list[list[float]] = [[] for _ in cases]
    for _ in range(repeats):
        for i, (n, L, grid, sources) in enumerate(cases):
            if grid is None:
                continue
            t0 = time.perf_counter()
            propagate(grid, sources, L, mode, threads)
            times[i].append((time.perf_counter() - t0) * 1e3)
    out = []
    for (n, L, grid, _), t in zip(cases, times):
        if grid is None:
            out.append(BenchSample(n, L, mode, threads, repeats, None, None, density, skipped=True))
        else:
            out.append(BenchSample(n, L, mode, threads, repeats, statistics.median(t), min(t), density))
    return out


def run_layer_sweep(
    n: int,
    layer_counts: Iterable[int],
    mode: Mode = "batched",
    threads: int | None = None,
    repeats: int = 3,
) -> list[BenchSample]:
    samples = []
    for L in layer_counts:
        samples.extend(run_benchmark([n], layers=L, mode=mode, threads=threads, repeats=repeats))
    return samples


def _fit_origin(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.dot(x, y) / np.dot(x, x))


def fit_scaling(samples: Iterable[BenchSample]) -> ScalingFit:
    """Least-squares lines through the origin.

    Per fixed L with >= 3 sizes: t against n^2. Per fixed n with >= 3 layer
    counts: t against L. Over every sample: t against L * n^2, whose worst
    relative residual is the goodness figure.
    """
    usable = [s for s in samples if not s.skipped]
    if len(usable) < 3:
        raise BenchError(f"need at least 3 timed samples to fit, got {len(usable)}")
    by_L: dict[int, list[BenchSample]] = defaultdict(list)
    by_n: dict[int, list[BenchSample]] = defaultdict(list)
    for s in usable:
        by_L[s.L].append(s)
        by_n[s.n].append(s)
    vs_cells = {}
    for L, group in by_L.items():
        if len({s.n for s in group}) >= 3:
            vs_cells[L] = _fit_origin(
                np.array([s.n**2 for s in group], float), np.array([s.median_ms for s in group])
            )
    vs_layers = {}
    for n, group in by_n.items():
        if len({s.L for s in group}) >= 3:
            vs_layers[n] = _fit_origin(
                np.array([s.L for s in group], float), np.array([s.median_ms for s in group])
            )
    x = np.array([s.L * s.n**2 for s in usable], float)
    y = np.array([s.median_ms for s in usable])
    c = _fit_origin(x, y)
    resid = float(np.max(np.abs(y - c * x) / y))
    return ScalingFit(vs_cells, vs_layers, c, resid)


def compare_modes(n: int, layers: int, threads: int | None = None, repeats: int = 3) -> dict:
    """Median time of batched vs iterative propagation on an empty map."""
    out = {}
    for mode in ("batched", "iterative"):
        (s,) = run_benchmark([n], layers=layers, mode=mode, threads=threads, repeats=repeats)
        out[mode] = s
    ratio = out["iterative"].median_ms / out["batched"].median_ms
    return {"batched": out["batched"], "iterative": out["iterative"], "iterative_over_batched": ratio}


def compare_densities(
    n: int,
    layers: int,
    densities: Sequence[float] = (0.0, 0.45),
    threads: int | None = None,
    repeats: int = 7,
    seed: int = 0,
) -> dict:
    """Time the same (n, L) at several obstacle densities.

    Runs are interleaved across densities so slow drift in machine load
    hits every density alike. The noise band is the largest min-to-median
    spread seen at any density.
    """
    if repeats < 3:
        raise BenchError(f"repeats must be >= 3, got {repeats}")
    grids = [build_grid(n, n) if d == 0 else random_maze(n, n, d, seed) for d in densities]
    srcs = [make_sources(g, random_free_cells(g, 1, seed)) for g in grids]
    for g, s in zip(grids, srcs):
        propagate(g, s, layers, "batched", threads)
    times: list[list[float]] = [[] for _ in densities]
    for _ in range(repeats):
        for i, (g, s) in enumerate(zip(grids, srcs)):
            t0 = time.perf_counter()
            propagate(g, s, layers, "batched", threads)
            times[i].append((time.perf_counter() - t0) * 1e3)
    samples = [
        BenchSample(n, layers, "batched", threads, repeats, statistics.median(t), min(t), d)
        for d, t in zip(densities, times)
    ]
    medians = [s.median_ms for s in samples]
    return {
        "samples": samples,
        "median_difference_ms": max(medians) - min(medians),
        "noise_band_ms": max(s.spread_ms for s in samples),
    }


def sample_dict(s: BenchSample) -> dict:
    return asdict(s)
