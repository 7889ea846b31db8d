"""Seeding helpers and the counter-hash uniform stream used inside kernels.

Point clouds and Gaussian draws use numpy's Philox bit generator.  The Monte
Carlo kernels need something different: a uniform that is a pure function of
``(key, counter)`` so a sample can stop drawing coordinates as soon as an
indicator fails, and so the numba and numpy backends see the same numbers.
That stream is the splitmix64 output function evaluated at
``key + counter * golden``.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

SEED_MASK = (1 << 64) - 1


def generator(seed: int) -> np.random.Generator:
    """Philox-backed generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & SEED_MASK)))


def replication_seed(base_seed: int, index: int) -> int:
    return (int(base_seed) ^ int(index)) & SEED_MASK


def derive_key(seed: int, *labels: int) -> int:
    """Stable 64-bit key for a labelled sub-stream (e.g. one series term)."""
    ss = np.random.SeedSequence([int(seed) & SEED_MASK, *(int(x) for x in labels)])
    return int(ss.generate_state(1, np.uint64)[0])


def slots_per_point(d: int) -> int:
    """Uniforms consumed by one point drawn from a d-ball."""
    if d == 1:
        return 1
    if d == 2:
        return 2
    return 2 * ((d + 1) // 2) + 1


# -- numba side -------------------------------------------------------------


@njit(cache=True, inline="always")
def hash_uniform(key, ctr):
    z = np.uint64(key) + np.uint64(ctr) * _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return (float(z >> _S11) + 0.5) * _INV53


@njit(cache=True)
def ball_point(key, ctr0, d, radius, out):
    """Write a uniform point of B(0, radius) in R^d into ``out``."""
    if d == 1:
        out[0] = radius * (2.0 * hash_uniform(key, ctr0) - 1.0)
        return
    if d == 2:
        ang = 2.0 * math.pi * hash_uniform(key, ctr0)
        r = radius * math.sqrt(hash_uniform(key, ctr0 + 1))
        out[0] = r * math.cos(ang)
        out[1] = r * math.sin(ang)
        return
    npair = (d + 1) // 2
    norm2 = 0.0
    for p in range(npair):
        u1 = hash_uniform(key, ctr0 + 2 * p)
        u2 = hash_uniform(key, ctr0 + 2 * p + 1)
        rad = math.sqrt(-2.0 * math.log(u1))
        z0 = rad * math.cos(2.0 * math.pi * u2)
        out[2 * p] = z0
        norm2 += z0 * z0
        if 2 * p + 1 < d:
            z1 = rad * math.sin(2.0 * math.pi * u2)
            out[2 * p + 1] = z1
            norm2 += z1 * z1
    scale = radius * hash_uniform(key, ctr0 + 2 * npair) ** (1.0 / d) / math.sqrt(norm2)
    for i in range(d):
        out[i] *= scale


# -- numpy side -------------------------------------------------------------


def hash_uniform_np(key: int, ctr: np.ndarray) -> np.ndarray:
    z = np.uint64(key) + np.asarray(ctr, dtype=np.uint64) * _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return ((z >> _S11).astype(np.float64) + 0.5) * _INV53


def ball_points_np(key: int, ctr0: np.ndarray, d: int, radius: float) -> np.ndarray:
    """Vectorised :func:`ball_point`; ``ctr0`` has one entry per point."""
    ctr0 = np.asarray(ctr0, dtype=np.uint64)
    out = np.empty(ctr0.shape + (d,))
    if d == 1:
        out[..., 0] = radius * (2.0 * hash_uniform_np(key, ctr0) - 1.0)
        return out
    if d == 2:
        ang = 2.0 * math.pi * hash_uniform_np(key, ctr0)
        r = radius * np.sqrt(hash_uniform_np(key, ctr0 + np.uint64(1)))
        out[..., 0] = r * np.cos(ang)
        out[..., 1] = r * np.sin(ang)
        return out
    npair = (d + 1) // 2
    for p in range(npair):
        u1 = hash_uniform_np(key, ctr0 + np.uint64(2 * p))
        u2 = hash_uniform_np(key, ctr0 + np.uint64(2 * p + 1))
        rad = np.sqrt(-2.0 * np.log(u1))
        out[..., 2 * p] = rad * np.cos(2.0 * math.pi * u2)
        if 2 * p + 1 < d:
            out[..., 2 * p + 1] = rad * np.sin(2.0 * math.pi * u2)
    norm = np.sqrt(np.sum(out * out, axis=-1))
    u = hash_uniform_np(key, ctr0 + np.uint64(2 * npair))
    out *= (radius * u ** (1.0 / d) / norm)[..., None]
    return out
