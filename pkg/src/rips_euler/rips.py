"""Vietoris–Rips clique filtration and the Euler characteristic step process.

Convention: filtration parameter ``r`` means closed balls of radius ``r``, so
two points are joined once ``|x - y| <= 2r`` and a simplex is born at half
its diameter.  Curves are indexed by ``t = r / s_n``.

Points are relabelled in lexicographic order before enumeration, which makes
the root (smallest vertex) of every clique its left-most point.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .kernels.cliques import OVER_BUDGET, CliqueArrays, enumerate_clique_arrays
from .kernels.neighbors import forward_adjacency
from .point_process import PointCloud
from .region import ALL_SPACE, RegionSpec

DEFAULT_CLIQUE_BUDGET = 10**8


class CliqueBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class FiltrationSimplex:
    vertices: tuple[int, ...]
    birth_radius: float

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1


def lexicographic_order(points: np.ndarray) -> np.ndarray:
    """Permutation sorting rows lexicographically (first coordinate primary)."""
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(points.T[::-1]).astype(np.int64)


def clique_arrays(points: np.ndarray, max_radius: float, dim_cap: int | None = None,
                  budget: int = DEFAULT_CLIQUE_BUDGET, want_vertices: bool = False):
    """Enumerate cliques of ``points`` (already in the caller's order) up to ``max_radius``."""
    if max_radius < 0:
        raise ValueError("max_radius must be nonnegative")
    indptr, indices = forward_adjacency(points, 2.0 * max_radius)
    res = enumerate_clique_arrays(points, indptr, indices, dim_cap, budget, want_vertices)
    if res.status == OVER_BUDGET:
        raise CliqueBudgetExceeded(
            f"more than {budget} cliques below radius {max_radius:g}; lower t_max or raise the budget")
    return res


@dataclass
class CliqueStream:
    """Cliques of a cloud with their birth radii; iterate for :class:`FiltrationSimplex`."""

    arrays: CliqueArrays
    order: np.ndarray
    dim_cap: int | None

    @property
    def truncated(self) -> bool:
        return self.arrays.truncated

    def __len__(self):
        return len(self.arrays)

    def __iter__(self) -> Iterator[FiltrationSimplex]:
        a = self.arrays
        pos = 0
        for size, birth in zip(a.sizes.tolist(), a.births.tolist()):
            verts = self.order[a.vertices[pos:pos + size]]
            pos += size
            yield FiltrationSimplex(tuple(sorted(int(v) for v in verts)), birth)


def enumerate_cliques(cloud: PointCloud, max_radius: float, dim_cap: int | None = None,
                      budget: int = DEFAULT_CLIQUE_BUDGET) -> CliqueStream:
    order = lexicographic_order(cloud.points)
    arrays = clique_arrays(cloud.points[order], max_radius, dim_cap, budget, want_vertices=True)
    return CliqueStream(arrays, order, dim_cap)


@dataclass
class EulerCurve:
    """Right-continuous integer step function of ``t``.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``;
    ``initial_value`` holds before the first breakpoint.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    initial_value: int
    t_max: float
    metadata: dict = field(default_factory=dict)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        table = np.concatenate(([self.initial_value], self.values)).astype(np.int64)
        out = table[idx]
        return int(out) if out.ndim == 0 else out

    evaluate = __call__

    def rows(self) -> list[tuple[float, int]]:
        return [(0.0, int(self.initial_value))] + [
            (float(b), int(v)) for b, v in zip(self.breakpoints, self.values)]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "chi"])
        for t, v in self.rows():
            w.writerow([repr(t), v])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_dict(self) -> dict:
        return {"breakpoints": [float(b) for b in self.breakpoints],
                "values": [int(v) for v in self.values],
                "initial_value": int(self.initial_value),
                "t_max": float(self.t_max),
                "metadata": self.metadata}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "EulerCurve":
        return cls(np.asarray(data["breakpoints"], dtype=float),
                   np.asarray(data["values"], dtype=np.int64),
                   int(data["initial_value"]), float(data["t_max"]), dict(data.get("metadata", {})))


@dataclass
class CliqueTimes:
    """Birth times (in ``t`` units), signs and LMP coordinates of every clique."""

    times: np.ndarray
    sizes: np.ndarray
    lmp: np.ndarray
    truncated: bool

    def select(self, region: RegionSpec) -> np.ndarray:
        if region.is_all:
            return np.ones(len(self.times), dtype=bool)
        return region.contains(self.lmp)


def clique_times(cloud: PointCloud, t_max: float, dim_cap: int | None = None,
                 budget: int = DEFAULT_CLIQUE_BUDGET) -> CliqueTimes:
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    d = cloud.dimension
    if len(cloud) == 0:
        return CliqueTimes(np.zeros(0), np.zeros(0, dtype=np.int32), np.zeros((0, d)), False)
    s_n = cloud.context.s_n
    order = lexicographic_order(cloud.points)
    pts = cloud.points[order]
    arrays = clique_arrays(pts, s_n * t_max, dim_cap, budget)
    times = arrays.births / s_n
    keep = times <= t_max
    return CliqueTimes(times[keep], arrays.sizes[keep], pts[arrays.roots[keep]], arrays.truncated)


def curve_from_times(ct: CliqueTimes, t_max: float, region: RegionSpec = ALL_SPACE,
                     metadata: dict | None = None) -> EulerCurve:
    mask = ct.select(region)
    times = ct.times[mask]
    signs = np.where(ct.sizes[mask] % 2 == 1, 1, -1).astype(np.int64)
    if len(times) == 0:
        return EulerCurve(np.zeros(0), np.zeros(0, dtype=np.int64), 0, t_max, dict(metadata or {}))
    uniq, inv = np.unique(times, return_inverse=True)
    delta = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(delta, inv, signs)
    initial = 0
    if uniq[0] == 0.0:
        initial = int(delta[0])
        uniq, delta = uniq[1:], delta[1:]
    moving = delta != 0
    uniq, delta = uniq[moving], delta[moving]
    values = initial + np.cumsum(delta)
    return EulerCurve(uniq, values.astype(np.int64), initial, float(t_max), dict(metadata or {}))


def euler_curve(cloud: PointCloud, t_max: float, region: RegionSpec = ALL_SPACE,
                dim_cap: int | None = None, budget: int = DEFAULT_CLIQUE_BUDGET) -> EulerCurve:
    """``t -> χ_{n,A}(t)`` on ``[0, t_max]``; ``region`` is ``A`` (all-space gives χ_n)."""
    ct = clique_times(cloud, t_max, dim_cap, budget)
    meta = {"n": float(cloud.context.n), "d": int(cloud.dimension), "seed": cloud.seed,
            "points": len(cloud), "dim_cap": dim_cap, "truncated": bool(ct.truncated),
            "region": region.to_dict(), "cliques": int(len(ct.times))}
    return curve_from_times(ct, t_max, region, meta)


def count_simplices(points: np.ndarray, radius: float, dim_cap: int | None = None,
                    budget: int = DEFAULT_CLIQUE_BUDGET) -> list[int]:
    """``[S_0, S_1, ...]`` of the Rips complex at ball radius ``radius``."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return []
    arrays = clique_arrays(points, radius, dim_cap, budget)
    return np.bincount(arrays.sizes - 1).astype(int).tolist()


def simplex_counts(cloud: PointCloud, t: float, dim_cap: int | None = None,
                   budget: int = DEFAULT_CLIQUE_BUDGET) -> list[int]:
    """``S_k(P_n, s_n t)`` for every ``k`` with a nonzero count."""
    ct = clique_times(cloud, t, dim_cap, budget)
    if len(ct.times) == 0:
        return []
    return np.bincount(ct.sizes.astype(np.int64) - 1).astype(int).tolist()
