"""Monte Carlo kernel for two overlapping clique indicators.

A configuration is the origin plus ``m = js + p1 + p2`` free points drawn
uniformly from ``B(0, radius)``: ``js`` shared points, then ``p1`` points
private to block 1, then ``p2`` private to block 2.  Block 1 is
``{0, shared, private1}``, block 2 is ``{0, shared, private2}``.  For each
sample the two block diameters ``D1``, ``D2`` are binned against a grid of
thresholds ``2 t_a`` (compared squared); ``hist[a, b]`` counts samples whose smallest
admissible grid indices are ``(a, b)``.  Samples with either diameter above
the last threshold are dropped, which lets the numba kernel stop drawing
coordinates early.

Uniforms come from the counter hash in :mod:`rips_euler.rng`; coordinate
slot ``c`` of point ``i`` in sample ``k`` uses counter
``(k * m + i) * slots + c``, so chunking never changes the result.
"""
from __future__ import annotations

import numpy as np

from .._accel import njit, use_numba
from ..rng import ball_point, ball_points_np, slots_per_point


@njit(cache=True, nogil=True)
def _first_index(thresholds, x):
    # smallest a with x <= thresholds[a]; len(thresholds) if none
    lo = 0
    hi = thresholds.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if x <= thresholds[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, nogil=True)
def _pair_hist_nb(key, start, count, d, js, p1, p2, radius, thresholds, slots):
    g = thresholds.shape[0]
    hist = np.zeros((g, g), dtype=np.int64)
    m = js + p1 + p2
    sq = thresholds * thresholds
    limit = sq[g - 1]
    pts = np.empty((max(m, 1), d))
    tmp = np.empty(d)
    for k in range(start, start + count):
        base = k * m
        ok = True
        dsh = 0.0
        # shared points: constrain both blocks
        for i in range(js):
            ball_point(key, (base + i) * slots, d, radius, tmp)
            r0 = 0.0
            for a in range(d):
                pts[i, a] = tmp[a]
                r0 += tmp[a] * tmp[a]
            dsh = max(dsh, r0)
            for q in range(i):
                s = 0.0
                for a in range(d):
                    diff = pts[i, a] - pts[q, a]
                    s += diff * diff
                dsh = max(dsh, s)
            if dsh > limit:
                ok = False
                break
        if not ok:
            continue
        d1 = dsh
        for i in range(js, js + p1):
            ball_point(key, (base + i) * slots, d, radius, tmp)
            r0 = 0.0
            for a in range(d):
                pts[i, a] = tmp[a]
                r0 += tmp[a] * tmp[a]
            d1 = max(d1, r0)
            for q in range(i):
                s = 0.0
                for a in range(d):
                    diff = pts[i, a] - pts[q, a]
                    s += diff * diff
                d1 = max(d1, s)
            if d1 > limit:
                ok = False
                break
        if not ok:
            continue
        d2 = dsh
        for i in range(js + p1, m):
            ball_point(key, (base + i) * slots, d, radius, tmp)
            r0 = 0.0
            for a in range(d):
                pts[i, a] = tmp[a]
                r0 += tmp[a] * tmp[a]
            d2 = max(d2, r0)
            # compare with shared points and earlier block-2 points only
            for q in range(js):
                s = 0.0
                for a in range(d):
                    diff = pts[i, a] - pts[q, a]
                    s += diff * diff
                d2 = max(d2, s)
            for q in range(js + p1, i):
                s = 0.0
                for a in range(d):
                    diff = pts[i, a] - pts[q, a]
                    s += diff * diff
                d2 = max(d2, s)
            if d2 > limit:
                ok = False
                break
        if not ok:
            continue
        hist[_first_index(sq, d1), _first_index(sq, d2)] += 1
    return hist


def _block_diameter2(blocks: np.ndarray) -> np.ndarray:
    """Squared diameter of ``{0} ∪ rows`` for an array of shape (batch, q, d)."""
    batch, q, d = blocks.shape
    if q == 0:
        return np.zeros(batch)
    full = np.concatenate([np.zeros((batch, 1, d)), blocks], axis=1)
    diff = full[:, :, None, :] - full[:, None, :, :]
    dist2 = np.sum(diff * diff, axis=-1)
    return dist2.reshape(batch, -1).max(axis=1)


def _pair_hist_np(key, start, count, d, js, p1, p2, radius, thresholds, slots, chunk=20_000):
    g = len(thresholds)
    hist = np.zeros((g, g), dtype=np.int64)
    m = js + p1 + p2
    sq = thresholds * thresholds
    limit = sq[-1]
    for c0 in range(start, start + count, chunk):
        c1 = min(c0 + chunk, start + count)
        ks = np.arange(c0, c1, dtype=np.int64)
        if m:
            ctr = ((ks[:, None] * m + np.arange(m)[None, :]) * slots).astype(np.uint64)
            pts = ball_points_np(key, ctr, d, radius)
        else:
            pts = np.zeros((len(ks), 0, d))
        b1 = pts[:, : js + p1]
        b2 = np.concatenate([pts[:, :js], pts[:, js + p1:]], axis=1)
        d1 = _block_diameter2(b1)
        d2 = _block_diameter2(b2)
        keep = (d1 <= limit) & (d2 <= limit)
        a1 = np.searchsorted(sq, d1[keep], side="left")
        a2 = np.searchsorted(sq, d2[keep], side="left")
        np.add.at(hist, (a1, a2), 1)
    return hist


def pair_histogram(key: int, n_samples: int, d: int, js: int, p1: int, p2: int,
                   radius: float, thresholds, start: int = 0) -> np.ndarray:
    """Histogram of binned block diameters over samples ``start .. start+n_samples-1``."""
    thresholds = np.ascontiguousarray(thresholds, dtype=np.float64)
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be nondecreasing")
    slots = slots_per_point(d)
    if use_numba():
        return _pair_hist_nb(np.uint64(key), int(start), int(n_samples), int(d), int(js), int(p1),
                             int(p2), float(radius), thresholds, int(slots))
    return _pair_hist_np(int(key), int(start), int(n_samples), int(d), int(js), int(p1), int(p2),
                         float(radius), thresholds, int(slots))
