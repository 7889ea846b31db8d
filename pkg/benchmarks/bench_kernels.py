"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each case runs once untimed (numba compilation, caches) and then
``--repeat`` times; the best wall time is reported.
"""
from __future__ import annotations

import argparse
import os
import time

import numpy as np

from rips_euler._accel import ENV_VAR, HAVE_NUMBA
from rips_euler.kernels.indicator import pair_histogram
from rips_euler.point_process import ScalingContext, UniformCube, sample_poisson
from rips_euler.rips import clique_arrays
from rips_euler.rng import derive_key


def _clique_case(n, d, t):
    cloud = sample_poisson(UniformCube(d), ScalingContext(n, d), 1)
    radius = cloud.context.radius(t)
    return lambda: len(clique_arrays(cloud.points, radius))


def _mc_case(d, js, p1, p2, samples):
    key = derive_key(3, js, p1, p2)
    thresholds = np.array([0.5, 1.0, 2.0])
    return lambda: int(pair_histogram(key, samples, d, js, p1, p2, 2.0, thresholds).sum())


CASES = {
    "cliques d=1 n=1e4 t=1": _clique_case(10_000, 1, 1.0),
    "cliques d=2 n=1e4 t=0.5": _clique_case(10_000, 2, 0.5),
    "cliques d=3 n=2e3 t=0.5": _clique_case(2_000, 3, 0.5),
    "mc d=1 (js,p1,p2)=(2,2,2) 2e5": _mc_case(1, 2, 2, 2, 200_000),
    "mc d=2 (js,p1,p2)=(1,3,1) 2e5": _mc_case(2, 1, 3, 1, 200_000),
    "mc d=3 (js,p1,p2)=(3,0,0) 2e5": _mc_case(3, 3, 0, 0, 200_000),
}


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba not installed; only the numpy backend is available")
    print(f"{'case':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}  check")
    saved = os.environ.get(ENV_VAR)
    try:
        for name, fn in CASES.items():
            os.environ[ENV_VAR] = "numba"
            tn, on = best_time(fn, args.repeat) if HAVE_NUMBA else (float("nan"), None)
            os.environ[ENV_VAR] = "numpy"
            tp, op = best_time(fn, args.repeat)
            same = "same" if on is None or on == op else f"DIFF {on} vs {op}"
            print(f"{name:34s} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f}x  {same}")
    finally:
        if saved is None:
            os.environ.pop(ENV_VAR, None)
        else:
            os.environ[ENV_VAR] = saved


if __name__ == "__main__":
    main()
