"""Numba stencil kernels for 3x3 max-pool propagation.

All kernels double-buffer: they read ``cur`` and write ``out`` and never
update in place. Out-of-bounds neighbours are handled by clamping the row
and column indices; clamping only repeats a cell already inside the window,
and since activity is never negative this equals zero padding.

The update is branch-free (``max * free + src``) so the amount of work per
cell does not depend on where obstacles are.
"""

from __future__ import annotations

import numba
import numpy as np
from numba import njit, prange

# Skip the TBB probe; old system TBB builds only produce a warning.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(inline="always")
def _max3(a, b, c):
    m = a if a > b else b
    return m if m > c else c


@njit(parallel=True, cache=True, nogil=True)
def layer(cur, out, free, src):
    """One propagation layer; returns the number of free cells left at zero."""
    h, w = cur.shape
    zeros = 0
    for r in prange(h):
        up = r - 1 if r > 0 else 0
        dn = r + 1 if r < h - 1 else h - 1
        a = cur[up]
        b = cur[r]
        d = cur[dn]
        fr = free[r]
        sr = src[r]
        o = out[r]
        left = _max3(a[0], b[0], d[0])
        mid = left
        row_zeros = 0
        for c in range(w):
            cr = c + 1 if c < w - 1 else w - 1
            right = _max3(a[cr], b[cr], d[cr])
            v = _max3(left, mid, right) * fr[c] + sr[c]
            o[c] = v
            row_zeros += (v == 0) & (fr[c] == 1)
            left = mid
            mid = right
        zeros += row_zeros
    return zeros


@njit(cache=True, nogil=True)
def run_layers(cur, scratch, free, src, layers):
    """Apply ``layers`` layers with no per-layer return to the caller.

    Returns the buffer holding the final map (either ``cur`` or ``scratch``).
    """
    a = cur
    b = scratch
    for _ in range(layers):
        layer(a, b, free, src)
        a, b = b, a
    return a


def set_threads(threads: int | None) -> int:
    """Pin the kernel thread count; ``None`` means all available."""
    available = numba.config.NUMBA_NUM_THREADS
    n = available if threads is None else max(1, min(int(threads), available))
    numba.set_num_threads(n)
    return n


def as_kernel_inputs(occupancy: np.ndarray, source_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    free = np.ascontiguousarray(~occupancy, dtype=np.int32)
    src = np.ascontiguousarray(source_mask, dtype=np.int32)
    return free, src
