"""Density models and critical-regime Poisson sampling.

A Poisson process with intensity ``n f`` is sampled as a Poisson(n) count
followed by that many i.i.d. draws from ``f``.  Distances in the Rips
filtration are measured against ``s_n = n**(-1/d)`` so that ``n s_n^d = 1``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .region import ALL_SPACE, RegionSpec
from .rng import generator

MAX_ATTEMPTS_PER_POINT = 10_000


class SamplingError(RuntimeError):
    """Rejection sampler exhausted its attempt budget."""


def _overlap(a: float, b: float, region: RegionSpec, axis: int) -> float:
    lo, hi = region.clip_interval(axis, a, b)
    return max(hi - lo, 0.0)


class DensityModel:
    """Common interface; concrete kinds below."""

    kind: str
    dimension: int

    def pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sup_norm(self) -> float:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def power_integral(self, p: int, region: RegionSpec = ALL_SPACE) -> float:
        raise NotImplementedError

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformCube(DensityModel):
    dimension: int
    side: float = 1.0
    center: tuple[float, ...] | None = None
    kind: str = field(default="uniform-cube", init=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not self.side > 0:
            raise ValueError("cube side must be positive")
        center = self.center
        if center is None:
            center = (self.side / 2.0,) * self.dimension
        center = tuple(float(c) for c in np.broadcast_to(center, (self.dimension,)))
        object.__setattr__(self, "center", center)

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.side / 2.0, c + self.side / 2.0

    def pdf(self, x):
        x = np.atleast_2d(x)
        lo, hi = self.bounding_box()
        inside = np.all((x >= lo) & (x <= hi), axis=1)
        return np.where(inside, self.side ** -self.dimension, 0.0)

    def sup_norm(self):
        return self.side ** -self.dimension

    def power_integral(self, p, region=ALL_SPACE):
        _check_power(p)
        lo, hi = self.bounding_box()
        vol = math.prod(_overlap(lo[i], hi[i], region, i) for i in range(self.dimension))
        return self.sup_norm() ** p * vol

    def sample(self, count, rng):
        lo, hi = self.bounding_box()
        return lo + (hi - lo) * rng.random((count, self.dimension))

    def to_dict(self):
        return {"kind": self.kind, "dimension": self.dimension, "side": self.side,
                "center": list(self.center)}


@dataclass(frozen=True)
class TruncatedGaussian(DensityModel):
    """Isotropic Gaussian restricted to an axis-aligned box and renormalised."""

    dimension: int
    mean: tuple[float, ...] = ()
    sigma: float = 1.0
    box_lo: tuple[float, ...] = ()
    box_hi: tuple[float, ...] = ()
    kind: str = field(default="truncated-gaussian", init=False)

    def __post_init__(self):
        d = self.dimension
        if d < 1:
            raise ValueError("dimension must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        for name in ("mean", "box_lo", "box_hi"):
            val = tuple(float(v) for v in np.broadcast_to(getattr(self, name), (d,)))
            object.__setattr__(self, name, val)
        if not all(np.isfinite(self.box_lo)) or not all(np.isfinite(self.box_hi)):
            raise ValueError("truncation box must be bounded")
        if not all(a < b for a, b in zip(self.box_lo, self.box_hi)):
            raise ValueError("truncation box needs lo < hi")

    def _z(self) -> np.ndarray:
        mu, sd = np.asarray(self.mean), self.sigma
        return ndtr((np.asarray(self.box_hi) - mu) / sd) - ndtr((np.asarray(self.box_lo) - mu) / sd)

    def _marginal(self, i: int):
        mu, sd, z = self.mean[i], self.sigma, self._z()[i]
        norm = 1.0 / (sd * math.sqrt(2.0 * math.pi) * z)
        return lambda x: norm * math.exp(-0.5 * ((x - mu) / sd) ** 2)

    def bounding_box(self):
        return np.asarray(self.box_lo), np.asarray(self.box_hi)

    def pdf(self, x):
        x = np.atleast_2d(x)
        lo, hi = self.bounding_box()
        mu = np.asarray(self.mean)
        inside = np.all((x >= lo) & (x <= hi), axis=1)
        q = np.sum(((x - mu) / self.sigma) ** 2, axis=1)
        norm = (self.sigma * math.sqrt(2.0 * math.pi)) ** -self.dimension / np.prod(self._z())
        return np.where(inside, norm * np.exp(-0.5 * q), 0.0)

    def sup_norm(self):
        lo, hi = self.bounding_box()
        mode = np.clip(np.asarray(self.mean), lo, hi)
        return float(self.pdf(mode[None, :])[0])

    def power_integral(self, p, region=ALL_SPACE):
        _check_power(p)
        total = 1.0
        for i in range(self.dimension):
            a, b = region.clip_interval(i, self.box_lo[i], self.box_hi[i])
            if b <= a:
                return 0.0
            g = self._marginal(i)
            # split at the mode so quad sees the peak
            pts = [self.mean[i]] if a < self.mean[i] < b else None
            val, _ = integrate.quad(lambda x: g(x) ** p, a, b, points=pts,
                                    epsabs=1e-14, epsrel=1e-10, limit=200)
            total *= val
        return total

    def sample(self, count, rng):
        lo, hi = self.bounding_box()
        return rejection_sample(self.pdf, lo, hi, self.sup_norm(), count, rng)

    def mean_vector(self) -> np.ndarray:
        """Analytic mean of the truncated law (per axis)."""
        mu, sd = np.asarray(self.mean), self.sigma
        alpha = (np.asarray(self.box_lo) - mu) / sd
        beta = (np.asarray(self.box_hi) - mu) / sd
        phi = lambda u: np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
        return mu + sd * (phi(alpha) - phi(beta)) / self._z()

    def to_dict(self):
        return {"kind": self.kind, "dimension": self.dimension, "mean": list(self.mean),
                "sigma": self.sigma, "box": {"lo": list(self.box_lo), "hi": list(self.box_hi)}}


@dataclass(frozen=True)
class PiecewiseConstant(DensityModel):
    """Density constant on the cells of a regular grid over ``[lo, hi]``.

    ``weights`` has one entry per cell (shape = cells per axis); it is
    normalised so the density integrates to one.
    """

    dimension: int
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()
    weights: np.ndarray = field(default_factory=lambda: np.ones(1))
    kind: str = field(default="piecewise-constant", init=False)

    def __post_init__(self):
        d = self.dimension
        for name in ("lo", "hi"):
            val = tuple(float(v) for v in np.broadcast_to(getattr(self, name), (d,)))
            object.__setattr__(self, name, val)
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 1 and d > 1 and w.size == 1:
            w = w.reshape((1,) * d)
        if w.ndim != d:
            raise ValueError("weights must have one axis per dimension")
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("weights must be nonnegative with positive sum")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("grid needs lo < hi")
        w = w / w.sum()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def cell_size(self) -> np.ndarray:
        return (np.asarray(self.hi) - np.asarray(self.lo)) / np.asarray(self.weights.shape)

    @property
    def cell_density(self) -> np.ndarray:
        return self.weights / float(np.prod(self.cell_size))

    def bounding_box(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def _cells(self, x: np.ndarray):
        lo, hi = self.bounding_box()
        idx = np.floor((x - lo) / self.cell_size).astype(np.int64)
        shape = np.asarray(self.weights.shape)
        idx = np.where(x == hi, shape - 1, idx)
        inside = np.all((x >= lo) & (x <= hi), axis=1)
        return np.clip(idx, 0, shape - 1), inside

    def pdf(self, x):
        x = np.atleast_2d(x)
        idx, inside = self._cells(x)
        vals = self.cell_density[tuple(idx.T)]
        return np.where(inside, vals, 0.0)

    def sup_norm(self):
        return float(self.cell_density.max())

    def power_integral(self, p, region=ALL_SPACE):
        _check_power(p)
        dens = self.cell_density
        size = self.cell_size
        # overlap volume of every cell with the region, built axis by axis
        vol = np.ones(dens.shape)
        for i, m in enumerate(dens.shape):
            edges = self.lo[i] + size[i] * np.arange(m + 1)
            lens = np.array([_overlap(edges[c], edges[c + 1], region, i) for c in range(m)])
            shape = [1] * self.dimension
            shape[i] = m
            vol = vol * lens.reshape(shape)
        return float(np.sum(dens ** p * vol))

    def sample(self, count, rng):
        flat = rng.choice(self.weights.size, size=count, p=self.weights.ravel())
        idx = np.stack(np.unravel_index(flat, self.weights.shape), axis=1)
        u = rng.random((count, self.dimension))
        return np.asarray(self.lo) + (idx + u) * self.cell_size

    def to_dict(self):
        return {"kind": self.kind, "dimension": self.dimension, "lo": list(self.lo),
                "hi": list(self.hi), "weights": self.weights.tolist()}


def _check_power(p):
    if int(p) != p or p < 1:
        raise ValueError(f"power must be a positive integer, got {p!r}")


def rejection_sample(pdf, lo, hi, sup, count, rng, max_attempts_per_point=MAX_ATTEMPTS_PER_POINT):
    """Draw ``count`` points from ``pdf`` with a box-times-sup envelope."""
    d = len(lo)
    out = np.empty((count, d))
    filled = 0
    attempts = 0
    budget = max_attempts_per_point * max(count, 1)
    while filled < count:
        if attempts >= budget:
            raise SamplingError(
                f"rejection sampler accepted {filled}/{count} points in {attempts} attempts; "
                "density support is too small for its bounding box")
        batch = min(max(2 * (count - filled), 64), budget - attempts)
        x = lo + (hi - lo) * rng.random((batch, d))
        keep = rng.random(batch) * sup <= pdf(x)
        attempts += batch
        got = x[keep][: count - filled]
        out[filled:filled + len(got)] = got
        filled += len(got)
    return out


def density_from_dict(data: dict) -> DensityModel:
    kind = data["kind"]
    d = int(data["dimension"])
    if kind == "uniform-cube":
        return UniformCube(d, float(data.get("side", 1.0)), data.get("center"))
    if kind == "truncated-gaussian":
        box = data["box"]
        return TruncatedGaussian(d, tuple(np.broadcast_to(data["mean"], (d,))), float(data["sigma"]),
                                 tuple(np.broadcast_to(box["lo"], (d,))),
                                 tuple(np.broadcast_to(box["hi"], (d,))))
    if kind == "piecewise-constant":
        return PiecewiseConstant(d, data["lo"], data["hi"], np.asarray(data["weights"], dtype=float))
    raise ValueError(f"unknown density kind {kind!r}")


def power_integral(model: DensityModel, p: int, region: RegionSpec = ALL_SPACE) -> float:
    """``∫_region f(x)^p dx``."""
    return model.power_integral(p, region)


@dataclass(frozen=True)
class ScalingContext:
    n: float
    d: int

    def __post_init__(self):
        if not (self.n >= 0 and math.isfinite(self.n)):
            raise ValueError("intensity n must be a finite nonnegative real")
        if self.d < 1:
            raise ValueError("dimension must be positive")

    @property
    def s_n(self) -> float:
        if self.n == 0:
            return math.inf
        return self.n ** (-1.0 / self.d)

    def radius(self, t: float) -> float:
        """Ball radius at filtration time ``t``."""
        return self.s_n * t if t > 0 else 0.0


@dataclass
class PointCloud:
    points: np.ndarray
    context: ScalingContext
    seed: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.context.d)
        if pts.ndim != 2 or pts.shape[1] != self.context.d:
            raise ValueError("points must be an (N, d) array matching the context dimension")
        self.points = pts

    @property
    def dimension(self) -> int:
        return self.context.d

    def __len__(self):
        return len(self.points)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(self.dimension)])
        for row in self.points:
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, context: ScalingContext, seed=None) -> "PointCloud":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if header != [f"x{i}" for i in range(context.d)]:
            raise ValueError(f"expected header x0..x{context.d - 1}, got {header}")
        pts = np.array([[float(v) for v in r] for r in body if r], dtype=float).reshape(-1, context.d)
        return cls(pts, context, seed)


def sample_poisson(model: DensityModel, ctx: ScalingContext, seed: int) -> PointCloud:
    """Sample the Poisson process with intensity ``ctx.n * model``."""
    if model.dimension != ctx.d:
        raise ValueError("model and scaling context disagree on dimension")
    rng = generator(seed)
    count = int(rng.poisson(ctx.n)) if ctx.n > 0 else 0
    return PointCloud(model.sample(count, rng), ctx, seed)
