import math

import numpy as np
import pytest

from oracles import d1_covariance
from rips_euler.harness import (CampaignConfig, CappedCurveRefused, normality_battery, run_fclt,
                                run_moment_asymptotics, run_palm_check, run_slln, simulate_chi)
from rips_euler.limits import CovarianceGrid
from rips_euler.point_process import UniformCube
from rips_euler.region import ALL_SPACE, RegionSpec
from rips_euler.rng import generator

U1 = UniformCube(1)
TG = [0.25, 0.5, 1.0]


def exact_grid(tg):
    m = np.array([[d1_covariance(t, s) for s in tg] for t in tg])
    return CovarianceGrid(np.array(tg), m, np.zeros_like(m))


def test_config_validation():
    with pytest.raises(ValueError):
        CampaignConfig(U1, [1e3], TG, 1)
    with pytest.raises(ValueError):
        CampaignConfig(U1, [1e4, 1e3], TG, 5)
    with pytest.raises(ValueError):
        CampaignConfig(U1, [1e3], [0.5, 0.25], 5)
    with pytest.raises(CappedCurveRefused):
        CampaignConfig(U1, [1e3], TG, 5, dim_cap=3)
    CampaignConfig(U1, [1e3], TG, 5, dim_cap=3, require_exact=False)


def test_fclt_refuses_small_r():
    with pytest.raises(ValueError):
        run_fclt(CampaignConfig(U1, [1e3], TG, 50))


def _synthetic(cov, n, reps, seed, scale=1.0):
    z = generator(seed).multivariate_normal(np.zeros(len(cov)), scale * cov, size=reps)
    return n * np.exp(-2 * np.array(TG)) + math.sqrt(n) * z


def test_fclt_self_test_passes_and_inflated_fails():
    cfg = CampaignConfig(U1, [1e4], TG, 400, base_seed=2)
    pred = exact_grid(TG)
    good = run_fclt(cfg, data=_synthetic(pred.matrix, 1e4, 400, 1), prediction=pred)
    assert good.passed
    assert all(abs(r["z"]) < 3 for r in good.rows)
    assert all(t["passed"] for t in good.stats["normality"]["tests"] if t["test"] == "anderson")
    bad = run_fclt(cfg, data=_synthetic(pred.matrix, 1e4, 400, 1, scale=2.0), prediction=pred)
    assert not bad.passed and not bad.gates["cov_z"]


def test_fclt_degenerate_grid_zero():
    cfg = CampaignConfig(U1, [2000.0], [0.0], 150, base_seed=3)
    rep = run_fclt(cfg)
    (row,) = rep.rows
    assert row["predicted"] == pytest.approx(1.0)
    assert abs(row["z"]) <= 3


def test_normality_battery_flags_skewed_data():
    rng = generator(4)
    good = normality_battery(rng.standard_normal((500, 3)), 1)
    bad = normality_battery(rng.exponential(size=(500, 3)), 1)
    assert good["fraction"] >= 0.9 and bad["fraction"] < 0.5
    assert good["total"] == 3 * (3 + 5)


def test_slln_small_campaign():
    cfg = CampaignConfig(U1, [500.0, 4000.0], [0.0, 0.5], 40, base_seed=5)
    rep = run_slln(cfg)
    t0 = [r for r in rep.rows if r["t"] == 0.0]
    assert all(abs(r["empirical"] - 1.0) < 0.05 for r in t0)
    assert rep.gates["z_largest_n"]
    se = [r["empirical_se"] for r in rep.rows if r["t"] == 0.5]
    assert se[1] < se[0]


def test_reports_deterministic():
    cfg = CampaignConfig(U1, [300.0, 600.0], TG, 12, base_seed=9)
    assert run_slln(cfg).to_json() == run_slln(cfg).to_json()
    assert run_moment_asymptotics(cfg).to_csv() == run_moment_asymptotics(cfg).to_csv()


def test_region_additivity_raw_sums():
    inf = float("inf")
    parts = [RegionSpec.box([-inf], [0.3]), RegionSpec.box([0.3], [0.7]), RegionSpec.box([0.7], [inf])]
    cfg = CampaignConfig(U1, [800.0], TG, 10, base_seed=1)
    chi = simulate_chi(cfg, 0, [ALL_SPACE] + parts)
    assert np.array_equal(chi[0], chi[1:].sum(axis=0))
    rep = run_moment_asymptotics(cfg, regions=[ALL_SPACE] + parts)
    sums = [np.array(v["sum_chi"]) for v in rep.stats["raw_sums"].values()]
    assert np.array_equal(sums[0], sums[1] + sums[2] + sums[3])


def test_moments_box_prediction():
    cfg = CampaignConfig(U1, [2000.0], TG, 30, base_seed=4, region=RegionSpec.box([0.0], [0.5]))
    rep = run_moment_asymptotics(cfg)
    box_rows = [r for r in rep.rows if r["statistic"] == "mean_box"]
    assert [r["predicted"] for r in box_rows] == pytest.approx(0.5 * np.exp(-2 * np.array(TG)), abs=1e-6)
    all_rows = [r for r in rep.rows if r["statistic"] == "mean_all"]
    assert all(abs(r["z"]) <= 4 for r in all_rows + box_rows)


def test_palm_check_small():
    rep = run_palm_check(U1, 100.0, 1, 0.05, 300, 3, mc_samples=200_000)
    stats_ = {r["statistic"]: r for r in rep.rows}
    assert set(stats_) == {"S_1", "pairs_1_l0", "pairs_1_l1"}
    assert stats_["S_1"]["predicted"] == pytest.approx(950, rel=0.02)
    assert rep.passed
    k0 = run_palm_check(U1, 100.0, 0, 0.05, 300, 3)
    row = k0.rows[0]
    assert row["predicted"] == 100.0 and row["predicted_se"] == 0.0 and abs(row["z"]) <= 3


def test_csv_columns():
    rep = run_palm_check(U1, 50.0, 0, 0.05, 20, 1, pairs=False)
    header, line = rep.to_csv().splitlines()
    assert header == "n,t,s,statistic,empirical,predicted,pooled_se,z"
    assert line.startswith("50.0,0.05,,S_0,")
