"""Fixed-radius neighbour pairs by grid bucketing.

Points are hashed into cubic cells of side ``h >= cutoff``; a pair can only
be within ``cutoff`` if their cells differ by at most one in every axis.
Output is a forward CSR adjacency (row ``i`` lists ``j > i``, ascending).
"""
from __future__ import annotations

import itertools

import numpy as np

from .._accel import njit, use_numba


def _cell_keys(points: np.ndarray, cutoff: float):
    n, d = points.shape
    # padded so a pair at exactly the cutoff cannot straddle two cells
    h = cutoff * (1.0 + 1e-9) if cutoff > 0 else 1.0
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    while True:
        with np.errstate(over="ignore"):
            ncell_f = np.floor(span / h) + 1.0
            total = float(np.prod(ncell_f))
        if total < 2.0 ** 62:
            break
        h *= 2.0
    ncell = ncell_f.astype(np.int64)
    cells = np.floor((points - lo) / h).astype(np.int64)
    cells = np.minimum(cells, ncell - 1)
    strides = np.ones(d, dtype=np.int64)
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * ncell[i + 1]
    keys = cells @ strides
    return cells, ncell, strides, keys


def _offsets(d: int) -> np.ndarray:
    return np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64).reshape(-1, d)


@njit(cache=True, nogil=True)
def _pairs_nb(points, cells, ncell, strides, order, sorted_keys, offsets, cutoff):
    n, d = points.shape
    deg = np.zeros(n, dtype=np.int64)
    cap = max(16, 4 * n)
    src = np.empty(cap, dtype=np.int64)
    dst = np.empty(cap, dtype=np.int64)
    m = 0
    for i in range(n):
        for o in range(offsets.shape[0]):
            key = 0
            ok = True
            for a in range(d):
                c = cells[i, a] + offsets[o, a]
                if c < 0 or c >= ncell[a]:
                    ok = False
                    break
                key += c * strides[a]
            if not ok:
                continue
            lo = np.searchsorted(sorted_keys, key)
            hi = np.searchsorted(sorted_keys, key, side="right")
            for q in range(lo, hi):
                j = order[q]
                if j <= i:
                    continue
                s = 0.0
                for a in range(d):
                    diff = points[i, a] - points[j, a]
                    s += diff * diff
                # compare the rooted distance: births are computed from it too
                if np.sqrt(s) <= cutoff:
                    if m == cap:
                        cap *= 2
                        src2 = np.empty(cap, dtype=np.int64)
                        dst2 = np.empty(cap, dtype=np.int64)
                        src2[:m] = src[:m]
                        dst2[:m] = dst[:m]
                        src, dst = src2, dst2
                    src[m] = i
                    dst[m] = j
                    deg[i] += 1
                    m += 1
    return src[:m], dst[:m], deg


def _pairs_np(points, cells, ncell, strides, order, sorted_keys, offsets, cutoff):
    n, d = points.shape
    srcs, dsts = [], []
    idx = np.arange(n)
    for off in offsets:
        nb_cells = cells + off
        valid = np.all((nb_cells >= 0) & (nb_cells < ncell), axis=1)
        keys = nb_cells[valid] @ strides
        lo = np.searchsorted(sorted_keys, keys, side="left")
        hi = np.searchsorted(sorted_keys, keys, side="right")
        cnt = hi - lo
        if cnt.sum() == 0:
            continue
        i_rep = np.repeat(idx[valid], cnt)
        start = np.repeat(lo - np.concatenate(([0], np.cumsum(cnt)[:-1])), cnt)
        q = start + np.arange(cnt.sum())
        j = order[q]
        keep = j > i_rep
        i_rep, j = i_rep[keep], j[keep]
        dist = np.sqrt(np.sum((points[i_rep] - points[j]) ** 2, axis=1))
        close = dist <= cutoff
        srcs.append(i_rep[close])
        dsts.append(j[close])
    src = np.concatenate(srcs) if srcs else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dsts) if dsts else np.empty(0, dtype=np.int64)
    deg = np.bincount(src, minlength=n).astype(np.int64)
    return src, dst, deg


def forward_adjacency(points: np.ndarray, cutoff: float):
    """Return ``(indptr, indices)`` of pairs ``i < j`` with ``|x_i - x_j| <= cutoff``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = len(points)
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.empty(0, dtype=np.int64)
    cells, ncell, strides, keys = _cell_keys(points, cutoff)
    order = np.argsort(keys, kind="stable").astype(np.int64)
    sorted_keys = keys[order]
    offsets = _offsets(points.shape[1])
    fn = _pairs_nb if use_numba() else _pairs_np
    src, dst, deg = fn(points, cells, ncell, strides, order, sorted_keys, offsets, float(cutoff))
    perm = np.lexsort((dst, src))
    indices = dst[perm].astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    return indptr, indices
