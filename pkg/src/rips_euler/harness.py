"""Replication campaigns comparing simulated Euler curves with the limit formulas.

Every verdict uses a pooled standard error (empirical and prediction errors
added in quadrature).  Reports hold no timing or host information, so a
config always serialises to the same bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .limits import CovarianceGrid, covariance_grid, limit_mean_grid
from .point_process import DensityModel, ScalingContext, sample_poisson
from .region import ALL_SPACE, RegionSpec
from .rips import clique_arrays, clique_times, curve_from_times
from .rng import derive_key, generator, replication_seed

Z_GATE = 3.0
NORMALITY_PASS_FRACTION = 0.9
NORMALITY_LEVEL = 1.0   # percent, for the Anderson-Darling critical value
N_PROJECTIONS = 5
MIN_FCLT_REPS = 100
CSV_COLUMNS = ["n", "t", "s", "statistic", "empirical", "predicted", "pooled_se", "z"]


class CappedCurveRefused(ValueError):
    """A campaign that needs exact curves was given a dimension cap, or hit one."""


@dataclass
class CampaignConfig:
    model: DensityModel
    n_values: list[float]
    t_grid: list[float]
    replications: int
    base_seed: int = 0
    epsilon: float = 1e-4         # covariance series
    mean_epsilon: float = 1e-6    # mean series
    mc_samples: int = 100_000
    region: RegionSpec = ALL_SPACE
    dim_cap: int | None = None
    require_exact: bool = True
    centering: str = "empirical"  # or "limit": subtract n K(t)
    jobs: int = 1

    def __post_init__(self):
        self.n_values = [float(n) for n in self.n_values]
        self.t_grid = [float(t) for t in self.t_grid]
        if self.replications < 2:
            raise ValueError("replications must be at least 2")
        if not self.n_values or any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be a nonempty increasing list")
        if any(n <= 0 for n in self.n_values):
            raise ValueError("n_values must be positive")
        if not self.t_grid or any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ValueError("t_grid must be a nonempty increasing list")
        if self.t_grid[0] < 0:
            raise ValueError("t_grid must be nonnegative")
        if self.centering not in ("empirical", "limit"):
            raise ValueError("centering must be 'empirical' or 'limit'")
        if self.require_exact and self.dim_cap is not None:
            raise CappedCurveRefused("acceptance campaigns need exact curves; drop dim_cap")

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict(), "n_values": self.n_values, "t_grid": self.t_grid,
                "replications": self.replications, "base_seed": self.base_seed,
                "epsilon": self.epsilon, "mean_epsilon": self.mean_epsilon,
                "mc_samples": self.mc_samples, "region": self.region.to_dict(),
                "dim_cap": self.dim_cap, "require_exact": self.require_exact,
                "centering": self.centering, "jobs": self.jobs}


def _clean(obj):
    """Plain JSON types, with non-finite floats spelled out."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    gates: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.gates.values())

    def add_row(self, n, t, s, statistic, empirical, emp_se, predicted, pred_se, gated=False):
        pooled = math.hypot(emp_se, pred_se)
        z = (empirical - predicted) / pooled if pooled > 0 else (0.0 if empirical == predicted else math.inf)
        row = {"n": n, "t": t, "s": s, "statistic": statistic, "empirical": float(empirical),
               "empirical_se": float(emp_se), "predicted": float(predicted),
               "predicted_se": float(pred_se), "pooled_se": pooled, "z": z, "gated": gated}
        self.rows.append(row)
        return row

    def gated_rows(self) -> list[dict]:
        return [r for r in self.rows if r["gated"]]

    def to_dict(self) -> dict:
        return _clean({"kind": self.kind, "config": self.config, "rows": self.rows,
                       "stats": self.stats, "gates": self.gates, "passed": self.passed})

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(["" if r[c] is None else (repr(float(r[c])) if isinstance(r[c], float) else r[c])
                        for c in CSV_COLUMNS])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


# -- simulation --------------------------------------------------------------


def campaign_seed(base_seed: int, n_index: int, rep: int) -> int:
    """Seed of replication ``rep`` at the ``n_index``-th intensity."""
    return replication_seed(derive_key(base_seed, n_index), rep)


def _one_replication(model, n, seed, t_grid, t_max, regions, dim_cap, require_exact):
    cloud = sample_poisson(model, ScalingContext(n, model.dimension), seed)
    ct = clique_times(cloud, t_max, dim_cap)
    if ct.truncated and require_exact:
        raise CappedCurveRefused(f"replication with seed {seed} hit the dimension cap")
    return np.array([curve_from_times(ct, t_max, r)(t_grid) for r in regions], dtype=np.int64)


def simulate_chi(cfg: CampaignConfig, n_index: int, regions=None, reps: int | None = None) -> np.ndarray:
    """χ_{n,A}(t) for every replication: shape ``(len(regions), R, len(t_grid))``."""
    regions = [cfg.region] if regions is None else list(regions)
    n = cfg.n_values[n_index]
    reps = cfg.replications if reps is None else reps
    tg = np.asarray(cfg.t_grid)
    args = [(cfg.model, n, campaign_seed(cfg.base_seed, n_index, i), tg, float(tg[-1]), regions,
             cfg.dim_cap, cfg.require_exact) for i in range(reps)]
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            out = list(pool.map(lambda a: _one_replication(*a), args))
    else:
        out = [_one_replication(*a) for a in args]
    return np.stack(out, axis=1)


def _cov_se(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased covariance of centred columns and per-entry standard errors."""
    r = len(y)
    yc = y - y.mean(axis=0)
    cov = yc.T @ yc / (r - 1)
    prod = yc[:, :, None] * yc[:, None, :]
    se = prod.std(axis=0, ddof=1) / math.sqrt(r)
    return cov, se


# -- normality ---------------------------------------------------------------


def normality_tests(x: np.ndarray, label: str) -> list[dict]:
    x = np.asarray(x, dtype=float)
    out = []
    if np.ptp(x) == 0:
        return [{"label": label, "test": name, "statistic": None, "threshold": None, "passed": False}
                for name in ("skew", "kurtosis", "anderson")]
    alpha = NORMALITY_LEVEL / 100.0
    sk = stats.skewtest(x)
    out.append({"label": label, "test": "skew", "statistic": float(sk.statistic),
                "pvalue": float(sk.pvalue), "threshold": alpha, "passed": bool(sk.pvalue >= alpha)})
    ku = stats.kurtosistest(x)
    out.append({"label": label, "test": "kurtosis", "statistic": float(ku.statistic),
                "pvalue": float(ku.pvalue), "threshold": alpha, "passed": bool(ku.pvalue >= alpha)})
    ad = stats.anderson(x, dist="norm")
    idx = int(np.argmin(np.abs(ad.significance_level - NORMALITY_LEVEL)))
    crit = float(ad.critical_values[idx])
    out.append({"label": label, "test": "anderson", "statistic": float(ad.statistic),
                "threshold": crit, "passed": bool(ad.statistic <= crit)})
    return out


def normality_battery(y: np.ndarray, seed: int) -> dict:
    """Coordinate-wise and random-projection normality checks of the rows of ``y``."""
    results = []
    for a in range(y.shape[1]):
        results += normality_tests(y[:, a], f"coord{a}")
    rng = generator(derive_key(seed, 0x50524F4A))
    for p in range(N_PROJECTIONS):
        u = rng.standard_normal(y.shape[1])
        u /= np.linalg.norm(u)
        results += normality_tests(y @ u, f"proj{p}")
    passed = sum(r["passed"] for r in results)
    return {"tests": results, "passed": passed, "total": len(results),
            "fraction": passed / len(results) if results else 0.0}


# -- operations ---------------------------------------------------------------


def _mean_prediction(cfg: CampaignConfig, region: RegionSpec):
    return limit_mean_grid(cfg.t_grid, cfg.model, region, cfg.mean_epsilon, cfg.mc_samples,
                           derive_key(cfg.base_seed, 0x4D45414E))


def _cov_prediction(cfg: CampaignConfig, region: RegionSpec) -> CovarianceGrid:
    return covariance_grid(cfg.t_grid, cfg.model, region, cfg.epsilon, cfg.mc_samples,
                           derive_key(cfg.base_seed, 0x434F56), cfg.jobs)


def run_slln(cfg: CampaignConfig) -> ExperimentReport:
    """Replication means of χ_n(t)/n against the limit mean at every n and t."""
    rep = ExperimentReport("slln", cfg.to_dict())
    pred = _mean_prediction(cfg, cfg.region)
    tg = cfg.t_grid
    abs_dev = []
    sup_dev = []
    for ni, n in enumerate(cfg.n_values):
        x = simulate_chi(cfg, ni)[0] / n
        mean = x.mean(axis=0)
        se = x.std(axis=0, ddof=1) / math.sqrt(len(x))
        last = ni == len(cfg.n_values) - 1
        for a, t in enumerate(tg):
            rep.add_row(n, t, None, "mean_chi_over_n", mean[a], se[a], pred.values[a],
                        pred.std_errors[a], gated=last)
        dev = np.abs(x - pred.values)
        abs_dev.append(dev.mean(axis=0))
        sup_dev.append(float(dev.max(axis=1).mean()))
    rep.stats = {"prediction": pred.to_dict(), "mean_abs_deviation": abs_dev,
                 "mean_sup_deviation": sup_dev}
    rep.gates["z_largest_n"] = all(abs(r["z"]) <= Z_GATE for r in rep.gated_rows())
    if len(cfg.n_values) > 1:
        shrinking = int(np.sum(abs_dev[-1] < abs_dev[-2]))
        rep.stats["deviation_shrinks_at"] = shrinking
        rep.gates["deviation_shrinks"] = shrinking >= min(2, len(tg))
    return rep


def run_fclt(cfg: CampaignConfig, data: np.ndarray | None = None,
             prediction: CovarianceGrid | None = None) -> ExperimentReport:
    """Covariance and Gaussianity of ``n^{-1/2}(χ_n(t) - centre)`` at the largest n.

    ``data`` (raw χ values, shape ``(R, len(t_grid))``) replaces the simulator,
    and ``prediction`` replaces the limit covariance; both exist for
    self-tests of the statistics.
    """
    if cfg.replications < MIN_FCLT_REPS:
        raise ValueError(f"FCLT needs at least {MIN_FCLT_REPS} replications")
    rep = ExperimentReport("fclt", cfg.to_dict())
    ni = len(cfg.n_values) - 1
    n = cfg.n_values[ni]
    chi = simulate_chi(cfg, ni)[0] if data is None else np.asarray(data, dtype=float)
    if chi.shape != (cfg.replications, len(cfg.t_grid)):
        raise ValueError("data must have shape (replications, len(t_grid))")
    pred = _cov_prediction(cfg, cfg.region) if prediction is None else prediction
    if cfg.centering == "empirical":
        centre = chi.mean(axis=0)
        y = (chi - centre) / math.sqrt(n)
        cov, se = _cov_se(y)
    else:
        centre = n * _mean_prediction(cfg, cfg.region).values
        y = (chi - centre) / math.sqrt(n)
        cov = y.T @ y / len(y)
        se = (y[:, :, None] * y[:, None, :]).std(axis=0, ddof=1) / math.sqrt(len(y))
    tg = cfg.t_grid
    for a in range(len(tg)):
        for b in range(a, len(tg)):
            rep.add_row(n, tg[a], tg[b], "cov", cov[a, b], se[a, b], pred.matrix[a, b],
                        pred.std_errors[a, b], gated=True)
    norm = normality_battery(y, cfg.base_seed)
    rep.stats = {"empirical_cov": cov, "empirical_cov_se": se, "predicted_cov": pred.matrix,
                 "predicted_cov_se": pred.std_errors, "psd_repair": pred.psd_repair,
                 "truncation": None if pred.truncation is None else vars(pred.truncation),
                 "normality": norm}
    rep.gates["cov_z"] = all(abs(r["z"]) <= Z_GATE for r in rep.rows)
    rep.gates["normality"] = norm["fraction"] >= NORMALITY_PASS_FRACTION
    return rep


def _tuple_hits(model: DensityModel, rng, samples: int, sizes: tuple[int, ...], shared: int,
                radius: float, chunk: int = 100_000) -> int:
    """Count i.i.d. draws where every block (``shared`` common points plus its own) has diameter ``<= 2 radius``."""
    hits = 0
    cut2 = (2.0 * radius) ** 2
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        common = model.sample(m * shared, rng).reshape(m, shared, model.dimension)
        ok = np.ones(m, dtype=bool)
        for size in sizes:
            own = model.sample(m * (size - shared), rng).reshape(m, size - shared, model.dimension)
            blk = np.concatenate([common, own], axis=1)
            diff = blk[:, :, None, :] - blk[:, None, :, :]
            ok &= np.all(np.sum(diff * diff, axis=-1) <= cut2, axis=(1, 2))
        hits += int(ok.sum())
        done += m
    return hits


def run_palm_check(model: DensityModel, n: float, k: int, radius: float, replications: int,
                   seed: int, mc_samples: int = 1_000_000, pairs: bool = True) -> ExperimentReport:
    """Simplex-count moments against i.i.d.-sample expectations.

    ``S_k`` is compared with ``n^(k+1)/(k+1)! P(diam <= 2 radius)``.  For
    ``k <= 1`` ordered pairs of k-simplices sharing exactly ``l`` vertices
    (``l`` in {0, 1}) are compared with
    ``n^(2k+2-l)/(l! ((k+1-l)!)^2) P(both blocks small)``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if replications < 2:
        raise ValueError("replications must be at least 2")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    cfg = {"model": model.to_dict(), "n": float(n), "k": k, "radius": radius,
           "replications": replications, "seed": seed, "mc_samples": mc_samples, "pairs": pairs}
    rep = ExperimentReport("palm-check", cfg)
    do_pairs = pairs and k <= 1
    s_k = np.zeros(replications)
    pair0 = np.zeros(replications)
    pair1 = np.zeros(replications)
    for i in range(replications):
        cloud = sample_poisson(model, ScalingContext(n, model.dimension), replication_seed(seed, i))
        pts = cloud.points
        if len(pts) == 0:
            continue
        arr = clique_arrays(pts, radius, dim_cap=k, want_vertices=do_pairs and k == 1)
        s_k[i] = np.count_nonzero(arr.sizes == k + 1)
        if do_pairs:
            if k == 0:
                pair0[i] = s_k[i] * (s_k[i] - 1)
            else:
                edges = arr.vertices[np.repeat(arr.sizes, arr.sizes) == 2]
                deg = np.bincount(edges, minlength=len(pts)).astype(float)
                pair1[i] = np.sum(deg * (deg - 1))
                pair0[i] = s_k[i] ** 2 - s_k[i] - pair1[i]
    rng = generator(derive_key(seed, 0x50414C4D, k))

    def compare(stat, values, factor, sizes, shared):
        if all(size == 1 for size in sizes):
            p, p_se = 1.0, 0.0
        else:
            p = _tuple_hits(model, rng, mc_samples, sizes, shared, radius) / mc_samples
            p_se = math.sqrt(p * (1 - p) / mc_samples)
        emp = float(values.mean())
        emp_se = float(values.std(ddof=1) / math.sqrt(len(values)))
        rep.add_row(float(n), radius, None, stat, emp, emp_se, factor * p, factor * p_se, gated=True)

    compare(f"S_{k}", s_k, n ** (k + 1) / math.factorial(k + 1), (k + 1,), 0)
    if do_pairs:
        size = k + 1
        compare(f"pairs_{k}_l0", pair0, n ** (2 * size) / math.factorial(size) ** 2, (size, size), 0)
        if k == 1:
            compare(f"pairs_{k}_l1", pair1, n ** 3, (2, 2), 1)
    rep.gates["z"] = all(abs(r["z"]) <= Z_GATE for r in rep.rows)
    return rep


def run_moment_asymptotics(cfg: CampaignConfig, regions=None) -> ExperimentReport:
    """Normalised mean and covariance of χ_{n,A} across n, for all-space and ``cfg.region``."""
    if regions is None:
        regions = [ALL_SPACE] if cfg.region.is_all else [ALL_SPACE, cfg.region]
    rep = ExperimentReport("moments", cfg.to_dict())
    tg = cfg.t_grid
    preds = [(_mean_prediction(cfg, r), _cov_prediction(cfg, r)) for r in regions]
    raw = {}
    for ni, n in enumerate(cfg.n_values):
        chi = simulate_chi(cfg, ni, regions)
        last = ni == len(cfg.n_values) - 1
        for ri, region in enumerate(regions):
            mp, cp = preds[ri]
            label = "all" if region.is_all else "box"
            x = chi[ri] / n
            mean = x.mean(axis=0)
            se = x.std(axis=0, ddof=1) / math.sqrt(len(x))
            for a, t in enumerate(tg):
                rep.add_row(n, t, None, f"mean_{label}", mean[a], se[a], mp.values[a],
                            mp.std_errors[a], gated=last)
            cov, cse = _cov_se(chi[ri] / math.sqrt(n))
            for a in range(len(tg)):
                for b in range(a, len(tg)):
                    rep.add_row(n, tg[a], tg[b], f"cov_{label}", cov[a, b], cse[a, b],
                                cp.matrix[a, b], cp.std_errors[a, b], gated=last)
            raw[f"{ri}:{label}:{n!r}"] = {"region": region.to_dict(),
                                     "sum_chi": chi[ri].sum(axis=0).tolist()}
    rep.stats = {"raw_sums": raw}
    rep.gates["z_largest_n"] = all(abs(r["z"]) <= Z_GATE for r in rep.gated_rows())
    return rep
