import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import subset_births, subset_cliques, subset_counts, subset_euler
from rips_euler.kernels.neighbors import forward_adjacency
from rips_euler.point_process import PointCloud, ScalingContext, UniformCube, sample_poisson
from rips_euler.region import ALL_SPACE, RegionSpec
from rips_euler.rips import (CliqueBudgetExceeded, EulerCurve, count_simplices, enumerate_cliques,
                             euler_curve, lexicographic_order, simplex_counts)
from rips_euler.rng import generator


def cloud_of(points, n=None):
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    return PointCloud(points, ScalingContext(float(n if n is not None else max(len(points), 1)), d))


def test_collinear_examples(backend):
    c = cloud_of([[0.0], [1.0], [2.0]])
    got = {s.vertices: s.birth_radius for s in enumerate_cliques(c, 0.5)}
    assert got == {(0,): 0.0, (1,): 0.0, (2,): 0.0, (0, 1): 0.5, (1, 2): 0.5}
    got = {s.vertices: s.birth_radius for s in enumerate_cliques(c, 1.0)}
    assert got[(0, 2)] == 1.0 and got[(0, 1, 2)] == 1.0 and len(got) == 7


def test_two_point_curve():
    c = PointCloud(np.array([[0.0], [2.0]]), ScalingContext(1.0, 1))
    curve = euler_curve(c, 3.0)
    assert curve.to_csv() == "t,chi\n0.0,2\n1.0,1\n"
    assert curve(0.999) == 2 and curve(1.0) == 1 and curve(3.0) == 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_cliques_match_subset_oracle(backend, d):
    rng = generator(d)
    for _ in range(10):
        pts = rng.random((8, d))
        radius = float(rng.uniform(0.05, 0.6))
        got = {s.vertices for s in enumerate_cliques(cloud_of(pts), radius)}
        assert got == subset_cliques(pts, radius)
        assert count_simplices(pts, radius) == subset_counts(pts, radius)


def test_curve_matches_subset_oracle(backend):
    rng = generator(11)
    for trial in range(20):
        d = 1 + trial % 3
        pts = rng.random((10, d))
        c = cloud_of(pts, n=10)
        t_max = 1.5 * np.sqrt(d) / (2 * c.context.s_n)
        curve = euler_curve(c, t_max)
        births, sizes = subset_births(pts)
        for t in rng.uniform(0, t_max, 50):
            assert curve(t) == subset_euler(births, sizes, c.context.s_n, t)


def test_filtration_monotone_and_sorted():
    c = sample_poisson(UniformCube(2), ScalingContext(200.0, 2), 3)
    stream = enumerate_cliques(c, 0.08)
    births = {}
    for s in stream:
        assert list(s.vertices) == sorted(set(s.vertices))
        births[s.vertices] = s.birth_radius
    for verts, b in births.items():
        for i in range(len(verts)):
            face = verts[:i] + verts[i + 1:]
            if face:
                assert births[face] <= b


def test_dim_cap_flags_truncation():
    pts = np.zeros((4, 1)) + np.arange(4)[:, None] * 0.01
    c = cloud_of(pts)
    full = euler_curve(c, 10.0)
    capped = euler_curve(c, 10.0, dim_cap=1)
    assert not full.metadata["truncated"] and capped.metadata["truncated"]
    assert capped.metadata["dim_cap"] == 1
    assert simplex_counts(c, 10.0, dim_cap=1) == [4, 6]


def test_budget_guard(backend):
    pts = np.zeros((12, 2))
    with pytest.raises(CliqueBudgetExceeded):
        count_simplices(pts, 1.0, budget=100)


def test_disjoint_region_is_zero():
    c = sample_poisson(UniformCube(2), ScalingContext(100.0, 2), 1)
    curve = euler_curve(c, 2.0, RegionSpec.box([5.0, 5.0], [6.0, 6.0]))
    assert curve(np.linspace(0, 2, 9)).tolist() == [0] * 9


def test_curve_json_roundtrip():
    c = sample_poisson(UniformCube(1), ScalingContext(100.0, 1), 2)
    curve = euler_curve(c, 1.0)
    again = EulerCurve.from_dict(__import__("json").loads(curve.to_json()))
    assert again.to_csv() == curve.to_csv()
    assert again.metadata["n"] == 100.0 and again.metadata["d"] == 1


def test_duplicates_kept_distinct():
    pts = np.array([[0.5, 0.5], [0.5, 0.5], [0.1, 0.9]])
    c = cloud_of(pts)
    # coincident points are joined already at radius 0
    assert simplex_counts(c, 0.0) == [3, 1]
    assert euler_curve(c, 0.0)(0.0) == 2
    order = lexicographic_order(np.array([[1.0, 0.0], [0.0, 5.0], [0.0, 1.0]]))
    assert order.tolist() == [2, 1, 0]


points_strategy = st.integers(1, 3).flatmap(
    lambda d: arrays(np.float64, st.tuples(st.integers(1, 9), st.just(d)),
                     elements=st.floats(0, 1, allow_nan=False, width=32)))


@settings(max_examples=60, deadline=None)
@given(points_strategy, st.floats(0.0, 1.0))
def test_alternating_sum_property(pts, t):
    c = cloud_of(pts)
    curve = euler_curve(c, 1.0)
    counts = simplex_counts(c, t)
    assert curve(t) == sum((-1) ** k * s for k, s in enumerate(counts))
    if len(np.unique(pts, axis=0)) == len(pts):
        assert curve(0.0) == len(pts)


@settings(max_examples=40, deadline=None)
@given(points_strategy, st.floats(0.0, 0.8), st.floats(0.5, 0.9))
def test_monotone_counts_property(pts, t, frac):
    c = cloud_of(pts)
    lo, hi = simplex_counts(c, t * frac), simplex_counts(c, t)
    lo = lo + [0] * (len(hi) - len(lo))
    assert all(a <= b for a, b in zip(lo, hi))


@settings(max_examples=40, deadline=None)
@given(points_strategy, st.floats(0.01, 0.7), st.floats(0.1, 10.0))
def test_scale_invariance_property(pts, radius, c):
    assert count_simplices(pts, radius) == count_simplices(pts * c, radius * c) or \
        _on_boundary(pts, radius, c)


def _on_boundary(pts, radius, c):
    # float rounding can move a pair sitting exactly at the cutoff
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    return bool(np.any(np.isclose(dist, 2 * radius, rtol=1e-9)))


@settings(max_examples=30, deadline=None)
@given(points_strategy)
def test_single_clique_value_one(pts):
    c = cloud_of(pts)
    d = pts.shape[1]
    t = np.sqrt(d) / (2 * c.context.s_n) + 1.0
    assert euler_curve(c, t)(t) == 1


@settings(max_examples=30, deadline=None)
@given(points_strategy, st.floats(0.05, 0.95))
def test_region_additivity_property(pts, cut):
    c = cloud_of(pts)
    d = pts.shape[1]
    inf = float("inf")
    left = RegionSpec.box([-inf] * d, [cut] + [inf] * (d - 1))
    right = RegionSpec.box([cut] + [-inf] * (d - 1), [inf] * d)
    ts = np.linspace(0, 1.0, 21)
    whole = euler_curve(c, 1.0, ALL_SPACE)(ts)
    parts = euler_curve(c, 1.0, left)(ts) + euler_curve(c, 1.0, right)(ts)
    assert whole.tolist() == parts.tolist()


def test_forward_adjacency_backends_agree(monkeypatch):
    from rips_euler._accel import ENV_VAR
    pts = generator(8).random((500, 2))
    monkeypatch.setenv(ENV_VAR, "numba")
    a = forward_adjacency(pts, 0.05)
    monkeypatch.setenv(ENV_VAR, "numpy")
    b = forward_adjacency(pts, 0.05)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
