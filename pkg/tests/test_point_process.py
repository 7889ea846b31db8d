import math

import numpy as np
import pytest
from scipy import integrate, stats

from rips_euler.point_process import (PiecewiseConstant, PointCloud, SamplingError, ScalingContext,
                                      TruncatedGaussian, UniformCube, density_from_dict, power_integral,
                                      rejection_sample, sample_poisson)
from rips_euler.region import RegionSpec
from rips_euler.rng import generator

MODELS = [
    UniformCube(1),
    UniformCube(2, side=2.0),
    UniformCube(3, side=0.5, center=(1.0, 1.0, 1.0)),
    TruncatedGaussian(1, (0.5,), 0.2, (0.0,), (1.0,)),
    TruncatedGaussian(2, (0.3, 0.6), 0.25, (0.0, 0.0), (1.0, 1.0)),
    PiecewiseConstant(1, (0.0,), (1.0,), np.array([1.0, 3.0, 2.0])),
    PiecewiseConstant(2, (0.0, 0.0), (2.0, 1.0), np.array([[1.0, 2.0], [0.5, 4.0]])),
]


def test_scaling_context():
    ctx = ScalingContext(1000.0, 3)
    assert ctx.n * ctx.s_n ** 3 == pytest.approx(1.0, rel=1e-15)
    assert ctx.radius(2.0) == pytest.approx(0.2)
    assert ScalingContext(0.0, 1).radius(0.0) == 0.0
    with pytest.raises(ValueError):
        ScalingContext(-1.0, 1)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__ + str(m.dimension))
def test_power_integral_one(model):
    assert model.power_integral(1) == pytest.approx(1.0, abs=1e-9)


def test_power_integral_examples():
    assert power_integral(UniformCube(1), 3) == 1.0
    assert power_integral(UniformCube(1, side=2.0), 2) == pytest.approx(0.5)
    box = RegionSpec.box([0.0], [0.5])
    assert UniformCube(1).power_integral(7, box) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        power_integral(UniformCube(1), 0)


def test_truncated_gaussian_power_integral_grid():
    m = TruncatedGaussian(2, (0.3, 0.6), 0.25, (0.0, 0.0), (1.0, 1.0))
    h = 1.0 / 2000
    axis = (np.arange(2000) + 0.5) * h
    x, y = np.meshgrid(axis, axis, indexing="ij")
    f = m.pdf(np.column_stack([x.ravel(), y.ravel()]))
    assert m.power_integral(2) == pytest.approx(np.sum(f ** 2) * h * h, rel=1e-5)


def test_piecewise_power_integral_region():
    m = PiecewiseConstant(1, (0.0,), (1.0,), np.array([1.0, 3.0]))
    # density 0.5 on [0, .5), 1.5 on [.5, 1)
    reg = RegionSpec.box([0.25], [0.75])
    expected = 0.25 * 0.5 ** 3 + 0.25 * 1.5 ** 3
    assert m.power_integral(3, reg) == pytest.approx(expected)
    val, _ = integrate.quad(lambda u: m.pdf(np.array([[u]]))[0] ** 3, 0.25, 0.75, points=[0.5])
    assert m.power_integral(3, reg) == pytest.approx(val, rel=1e-9)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__ + str(m.dimension))
def test_sup_norm_dominates_samples(model):
    pts = model.sample(2000, generator(3))
    assert pts.shape == (2000, model.dimension)
    assert np.all(model.pdf(pts) <= model.sup_norm() * (1 + 1e-12))
    lo, hi = model.bounding_box()
    assert np.all(pts >= lo) and np.all(pts <= hi)


def test_truncated_gaussian_mean():
    m = TruncatedGaussian(1, (0.2,), 0.3, (0.0,), (1.0,))
    pts = m.sample(20000, generator(5))[:, 0]
    a, b = (0.0 - 0.2) / 0.3, (1.0 - 0.2) / 0.3
    exact = stats.truncnorm(a, b, loc=0.2, scale=0.3).mean()
    assert m.mean_vector()[0] == pytest.approx(exact, rel=1e-10)
    se = pts.std(ddof=1) / math.sqrt(len(pts))
    assert abs(pts.mean() - exact) <= 3 * se


def test_poisson_counts_mean_and_dispersion():
    ctx = ScalingContext(1000.0, 1)
    counts = np.array([len(sample_poisson(UniformCube(1), ctx, s)) for s in range(200)])
    assert abs(counts.mean() - 1000) <= 3 * math.sqrt(1000 / 200)
    disp = counts.var(ddof=1) / counts.mean()
    assert 1 - 5 / math.sqrt(200) <= disp <= 1 + 5 / math.sqrt(200)


def test_empty_and_determinism():
    assert len(sample_poisson(UniformCube(2), ScalingContext(0.0, 2), 1)) == 0
    m = TruncatedGaussian(2, (0.3, 0.6), 0.25, (0.0, 0.0), (1.0, 1.0))
    a = sample_poisson(m, ScalingContext(500.0, 2), 99)
    b = sample_poisson(m, ScalingContext(500.0, 2), 99)
    assert a.points.tobytes() == b.points.tobytes()
    with pytest.raises(ValueError):
        sample_poisson(m, ScalingContext(10.0, 1), 1)


def test_rejection_cap():
    rng = generator(0)
    with pytest.raises(SamplingError):
        rejection_sample(lambda x: np.zeros(len(x)), np.zeros(1), np.ones(1), 1.0, 5, rng,
                         max_attempts_per_point=10)


def test_csv_roundtrip(tmp_path):
    cloud = sample_poisson(UniformCube(2), ScalingContext(50.0, 2), 4)
    path = tmp_path / "pts.csv"
    text = cloud.to_csv(path)
    assert text.splitlines()[0] == "x0,x1"
    back = PointCloud.from_csv(path, cloud.context)
    assert back.points.tobytes() == cloud.points.tobytes()


def test_density_from_dict_roundtrip():
    for m in MODELS:
        again = density_from_dict(m.to_dict())
        x = m.sample(50, generator(1))
        assert np.allclose(again.pdf(x), m.pdf(x))
