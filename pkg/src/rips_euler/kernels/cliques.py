"""Clique enumeration over a forward adjacency with birth radii.

Each clique is produced once: it is grown from its smallest vertex and only
extended by higher-indexed common neighbours.  The birth radius of a clique
is half its largest pairwise distance.

The numba kernel walks depth-first per root vertex; the numpy kernel grows
all cliques one size at a time.  Both return the same multiset of cliques
(ordering differs).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import njit, use_numba

OK = 0
OVER_BUDGET = 1


@dataclass
class CliqueArrays:
    births: np.ndarray          # birth radius per clique
    sizes: np.ndarray           # vertex count per clique
    roots: np.ndarray           # smallest vertex index per clique
    vertices: np.ndarray | None  # flat vertex lists, ``sizes`` entries each
    truncated: bool
    status: int

    def __len__(self):
        return len(self.births)


@njit(cache=True, nogil=True)
def _grow_f(a, cap):
    b = np.empty(cap, dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True, nogil=True)
def _dist(points, i, j):
    s = 0.0
    for a in range(points.shape[1]):
        diff = points[i, a] - points[j, a]
        s += diff * diff
    return np.sqrt(s)


@njit(cache=True, nogil=True)
def _cliques_nb(points, indptr, indices, max_size, budget, want_vertices):
    n = points.shape[0]
    maxdeg = 0
    for i in range(n):
        maxdeg = max(maxdeg, indptr[i + 1] - indptr[i])
    buf = np.empty(maxdeg * (maxdeg + 1) // 2 + 1, dtype=np.int64)
    levels = maxdeg + 2
    cstart = np.zeros(levels, dtype=np.int64)
    clen = np.zeros(levels, dtype=np.int64)
    cpos = np.zeros(levels, dtype=np.int64)
    clique = np.zeros(levels, dtype=np.int64)
    bdist = np.zeros(levels, dtype=np.float64)

    cap = max(64, 2 * n)
    births = np.empty(cap, dtype=np.float64)
    sizes = np.empty(cap, dtype=np.int32)
    roots = np.empty(cap, dtype=np.int64)
    vcap = cap if want_vertices else 1
    verts = np.empty(vcap, dtype=np.int64)
    count = 0
    nverts = 0
    truncated = False

    for v in range(n):
        if count == cap:
            cap *= 2
            births = _grow_f(births, cap)
            sizes = _grow_f(sizes, cap)
            roots = _grow_f(roots, cap)
        births[count] = 0.0
        sizes[count] = 1
        roots[count] = v
        count += 1
        if want_vertices:
            if nverts + 1 > vcap:
                vcap = 2 * vcap + 1
                verts = _grow_f(verts, vcap)
            verts[nverts] = v
            nverts += 1
        deg = indptr[v + 1] - indptr[v]
        if deg == 0:
            continue
        if max_size <= 1:
            truncated = True
            continue
        for q in range(deg):
            buf[q] = indices[indptr[v] + q]
        clique[0] = v
        bdist[0] = 0.0
        cstart[1] = 0
        clen[1] = deg
        cpos[1] = 0
        level = 1
        while level >= 1:
            if cpos[level] >= clen[level]:
                level -= 1
                continue
            w = buf[cstart[level] + cpos[level]]
            cpos[level] += 1
            b = bdist[level - 1]
            for i in range(level):
                dd = _dist(points, clique[i], w)
                if dd > b:
                    b = dd
            size = level + 1
            if count == cap:
                cap *= 2
                births = _grow_f(births, cap)
                sizes = _grow_f(sizes, cap)
                roots = _grow_f(roots, cap)
            births[count] = 0.5 * b
            sizes[count] = size
            roots[count] = v
            count += 1
            if want_vertices:
                if nverts + size > vcap:
                    vcap = 2 * vcap + size
                    verts = _grow_f(verts, vcap)
                for i in range(level):
                    verts[nverts + i] = clique[i]
                verts[nverts + level] = w
                nverts += size
            if count > budget:
                return births[:count], sizes[:count], roots[:count], verts[:nverts], truncated, OVER_BUDGET
            # candidates for the next level: remaining ones adjacent to w
            rs = cstart[level] + cpos[level]
            re = cstart[level] + clen[level]
            ns = re
            k = 0
            p = indptr[w]
            pe = indptr[w + 1]
            q = rs
            while q < re and p < pe:
                a = buf[q]
                c = indices[p]
                if a == c:
                    buf[ns + k] = a
                    k += 1
                    q += 1
                    p += 1
                elif a < c:
                    q += 1
                else:
                    p += 1
            if k == 0:
                continue
            if size >= max_size:
                truncated = True
                continue
            clique[level] = w
            bdist[level] = b
            level += 1
            cstart[level] = ns
            clen[level] = k
            cpos[level] = 0
    return births[:count], sizes[:count], roots[:count], verts[:nverts], truncated, OK


def _cliques_np(points, indptr, indices, max_size, budget, want_vertices):
    n = len(points)
    deg = np.diff(indptr)
    edge_keys = np.repeat(np.arange(n, dtype=np.int64), deg) * n + indices
    births = [np.zeros(n)]
    sizes = [np.ones(n, dtype=np.int32)]
    roots = [np.arange(n, dtype=np.int64)]
    verts = [np.arange(n, dtype=np.int64)]
    count = n
    truncated = False

    def dist(a, b):
        return np.sqrt(np.sum((points[a] - points[b]) ** 2, axis=1))

    cur = np.arange(n, dtype=np.int64)[:, None]
    cur_b = np.zeros(n)
    size = 1
    while len(cur):
        last = cur[:, -1]
        cnt = deg[last]
        rows = np.repeat(np.arange(len(cur)), cnt)
        if len(rows) == 0:
            break
        offs = np.repeat(indptr[last] - np.concatenate(([0], np.cumsum(cnt)[:-1])), cnt)
        w = indices[offs + np.arange(cnt.sum())]
        keep = np.ones(len(rows), dtype=bool)
        for i in range(size - 1):
            u = cur[rows, i]
            pos = np.searchsorted(edge_keys, u * n + w)
            pos = np.minimum(pos, len(edge_keys) - 1)
            keep &= edge_keys[pos] == u * n + w
        rows, w = rows[keep], w[keep]
        if len(rows) == 0:
            break
        if size >= max_size:
            truncated = True
            break
        b = cur_b[rows].copy()
        for i in range(size):
            b = np.maximum(b, dist(cur[rows, i], w))
        cur = np.column_stack([cur[rows], w])
        cur_b = b
        size += 1
        births.append(0.5 * b)
        sizes.append(np.full(len(cur), size, dtype=np.int32))
        roots.append(cur[:, 0].copy())
        verts.append(cur.ravel())
        count += len(cur)
        if count > budget:
            break
    births = np.concatenate(births)
    sizes = np.concatenate(sizes)
    roots = np.concatenate(roots)
    vflat = np.concatenate(verts) if want_vertices else np.empty(0, dtype=np.int64)
    status = OVER_BUDGET if count > budget else OK
    return births, sizes, roots, vflat, truncated, status


def enumerate_clique_arrays(points, indptr, indices, dim_cap=None, budget=10**8,
                            want_vertices=False) -> CliqueArrays:
    points = np.ascontiguousarray(points, dtype=np.float64)
    max_size = np.iinfo(np.int64).max if dim_cap is None else int(dim_cap) + 1
    fn = _cliques_nb if use_numba() else _cliques_np
    births, sizes, roots, verts, truncated, status = fn(
        points, indptr, indices, max_size, int(budget), bool(want_vertices))
    return CliqueArrays(births, sizes, roots, verts if want_vertices else None,
                        bool(truncated), int(status))
