"""Limiting mean and covariance of the Euler characteristic process.

Everything here is in the scaled picture (``n s_n^d = 1``).  A series term
is indexed by ``(j, k1, k2)``: two cliques with ``k1 + 1`` and ``k2 + 1``
vertices sharing ``j`` of them, one shared vertex pinned at the origin.
Its weight is

    psi = ∫_A f^(k1+k2+2-j) / (j! (k1+1-j)! (k2+1-j)!) * vol(j, k1, k2; t, s)

where ``vol`` is the Lebesgue measure of configurations of the
``k1+k2+1-j`` free points for which block 1 has diameter ``<= 2t`` and block
2 has diameter ``<= 2s``.

In one dimension every volume is exact (:func:`pair_volume_1d`).  In higher
dimensions volumes are Monte Carlo estimates from
:func:`rips_euler.kernels.indicator.pair_histogram`, which evaluates a whole
``t`` grid from one set of samples.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammainc, roots_legendre

from .kernels.indicator import pair_histogram
from .point_process import DensityModel
from .region import ALL_SPACE, RegionSpec
from .rng import derive_key, generator

K_MAX_CAP = 400
EXACT_METHODS = ("closed-form", "closed-form-1d")


class TruncationCapExceeded(RuntimeError):
    """The series needs more terms than the configured cap."""


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def a_t(t: float, d: int, sup_norm: float) -> float:
    """``(2t)^d θ_d ||f||_∞``, the per-point volume bound driving every tail."""
    return (2.0 * t) ** d * unit_ball_volume(d) * sup_norm


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def mean_tail_bound(a: float, k_max: int) -> float:
    """``sum_{k > k_max} a^k / (k+1)!``."""
    if a <= 0:
        return 0.0
    return _exp(a) * float(gammainc(k_max + 2, a)) / a


def covariance_tail_bound(a: float, k_max: int) -> float:
    """Sum of ``a^(k1+k2+1-j) / (j! (k1+1-j)! (k2+1-j)!)`` over terms outside ``[0, k_max]^2``.

    With ``p = j-1``, ``q = k1+1-j``, ``r = k2+1-j`` a term is
    ``a^(p+q+r) / ((p+1)! q! r!)``; for fixed ``p`` the excluded ``(q, r)``
    mass is ``e^{2a} g (2 - g)`` with ``g = P(Poisson(a) > k_max - p)``.
    """
    if a <= 0:
        return 0.0
    total = 0.0
    for p in range(k_max + 1):
        g = float(gammainc(k_max - p + 1, a))
        total += _exp(p * math.log(a) - math.lgamma(p + 2)) * g * (2.0 - g)
    total += _exp(a) * float(gammainc(k_max + 2, a)) / a
    return _exp(2.0 * a) * total


def _smallest_k(bound, a: float, eps: float, cap: int) -> int:
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    for k in range(cap + 1):
        if bound(a, k) <= eps:
            return k
    raise TruncationCapExceeded(
        f"a_t = {a:.4g} needs more than {cap} series terms for epsilon = {eps:g}")


@dataclass(frozen=True)
class SeriesTruncation:
    k_max: int
    tail_bound: float
    a_t: float
    epsilon: float
    kind: str = "mean"


def mean_truncation(a: float, eps: float, cap: int = K_MAX_CAP) -> SeriesTruncation:
    k = _smallest_k(mean_tail_bound, a, eps, cap)
    return SeriesTruncation(k, mean_tail_bound(a, k), a, eps, "mean")


def covariance_truncation(a: float, eps: float, cap: int = K_MAX_CAP) -> SeriesTruncation:
    k = _smallest_k(covariance_tail_bound, a, eps, cap)
    return SeriesTruncation(k, covariance_tail_bound(a, k), a, eps, "covariance")


@dataclass(frozen=True)
class IndicatorVolumeQuery:
    d: int
    k1: int
    k2: int
    j: int
    t: float
    s: float
    t_max: float | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("k1, k2 must be nonnegative")
        if not 1 <= self.j <= min(self.k1, self.k2) + 1:
            raise ValueError(f"j must lie in [1, {min(self.k1, self.k2) + 1}]")
        if self.t < 0 or self.s < 0:
            raise ValueError("t and s must be nonnegative")
        if self.t_max is not None and max(self.t, self.s) > self.t_max:
            raise ValueError("t, s exceed the configured t_max")

    @property
    def free_points(self) -> int:
        return self.k1 + self.k2 + 1 - self.j


@dataclass
class PsiEstimate:
    value: float
    std_error: float
    samples: int
    method: str
    truncation: SeriesTruncation | None = None

    @property
    def exact(self) -> bool:
        return self.method in EXACT_METHODS

    def to_dict(self) -> dict:
        out = {"value": self.value, "std_error": self.std_error, "samples": self.samples,
               "method": self.method}
        if self.truncation is not None:
            out["truncation"] = asdict(self.truncation)
        return out


def diagonal_volume_1d(k: int, a: float) -> float:
    """Length measure of ``{y in R^k : diam({0, y_1..y_k}) <= a}``."""
    return (k + 1) * a ** k


def _extension_volume_1d(p: int, w, a: float):
    """Measure of ``y in R^p`` keeping the range of ``[0, w] ∪ y`` within ``a`` (``w <= a``)."""
    if p == 0:
        return np.ones_like(w)
    return a ** (p - 1) * (a + p * (a - w))


def pair_volume_1d(js: int, p1: int, p2: int, a: float, b: float) -> float:
    """Exact 1-d indicator volume with diameter caps ``a`` (block 1) and ``b`` (block 2).

    The origin and the ``js`` shared points span an interval of width ``w``
    with density ``js (js+1) w^(js-1)``; given ``w`` the private points of
    each block contribute :func:`_extension_volume_1d`.  The integrand is a
    polynomial in ``w``, so Gauss-Legendre with enough nodes is exact.
    """
    if js == 0:
        zero = np.zeros(1)
        return float(_extension_volume_1d(p1, zero, a)[0] * _extension_volume_1d(p2, zero, b)[0])
    c = min(a, b)
    if c <= 0:
        return 0.0
    x, wt = roots_legendre((js - 1 + p1 + p2) // 2 + 1)
    u = 0.5 * c * (x + 1.0)
    f = js * (js + 1) * u ** (js - 1) * _extension_volume_1d(p1, u, a) * _extension_volume_1d(p2, u, b)
    return float(0.5 * c * np.sum(wt * f))


@dataclass
class _TermGrid:
    """Indicator volumes of one term on a t grid (block 1 at rows, block 2 at columns)."""

    values: np.ndarray
    var: np.ndarray
    inc_var: np.ndarray   # variance of the adjacent-increment estimate, len(grid)
    samples: int
    method: str


def _term_grid(d, k1, k2, j, t_grid, mc_samples, key, closed_form=True) -> _TermGrid:
    t_grid = np.asarray(t_grid, dtype=float)
    g = len(t_grid)
    m = k1 + k2 + 1 - j
    zeros = np.zeros((g, g))
    if m == 0:
        return _TermGrid(np.ones((g, g)), zeros, np.zeros(g), 0, "closed-form")
    big_t = float(t_grid.max())
    if big_t == 0.0:
        return _TermGrid(zeros.copy(), zeros, np.zeros(g), 0, "closed-form")
    if d == 1 and closed_form:
        js, p1, p2 = j - 1, k1 + 1 - j, k2 + 1 - j
        vals = np.array([[pair_volume_1d(js, p1, p2, 2.0 * t, 2.0 * s) for s in t_grid]
                         for t in t_grid])
        return _TermGrid(vals, zeros, np.zeros(g), 0, "closed-form-1d")
    if mc_samples <= 0:
        raise ValueError("mc_samples must be positive")
    radius = 2.0 * big_t
    vol = unit_ball_volume(d) * radius ** d
    hist = pair_histogram(key, mc_samples, d, j - 1, k1 + 1 - j, k2 + 1 - j, radius, 2.0 * t_grid)
    cum = hist.cumsum(axis=0).cumsum(axis=1)
    p = cum / mc_samples
    scale = vol ** m
    values = scale * p
    var = scale ** 2 * p * (1.0 - p) / mc_samples
    pin = np.diag(hist) / mc_samples
    inc_var = scale ** 2 * pin * (1.0 - pin) / mc_samples
    inc_var[0] = 0.0
    return _TermGrid(values, var, inc_var, int(mc_samples), "monte-carlo")


def indicator_volume(q: IndicatorVolumeQuery, mc_samples: int, seed: int,
                     closed_form: bool = True) -> PsiEstimate:
    """Volume of admissible free-point configurations for one ``(j, k1, k2, t, s)``.

    Monte Carlo draws every free point uniformly from ``B(0, 2 max(t, s))``.
    """
    if mc_samples <= 0:
        raise ValueError("mc_samples must be positive")
    grid = np.array(sorted({q.t, q.s}))
    tg = _term_grid(q.d, q.k1, q.k2, q.j, grid, mc_samples,
                    derive_key(seed, q.k1, q.k2, q.j), closed_form)
    a = int(np.searchsorted(grid, q.t))
    b = int(np.searchsorted(grid, q.s))
    return PsiEstimate(float(tg.values[a, b]), float(math.sqrt(tg.var[a, b])), tg.samples, tg.method)


def _prefactor(model: DensityModel, region: RegionSpec, k1: int, k2: int, j: int) -> float:
    denom = math.factorial(j) * math.factorial(k1 + 1 - j) * math.factorial(k2 + 1 - j)
    return model.power_integral(k1 + k2 + 2 - j, region) / denom


def psi(j: int, k1: int, k2: int, t: float, s: float, model: DensityModel,
        region: RegionSpec = ALL_SPACE, mc_samples: int = 100_000, seed: int = 0,
        closed_form: bool = True) -> PsiEstimate:
    q = IndicatorVolumeQuery(model.dimension, k1, k2, j, t, s)
    vol = indicator_volume(q, mc_samples, seed, closed_form)
    c = _prefactor(model, region, k1, k2, j)
    return PsiEstimate(c * vol.value, c * vol.std_error, vol.samples, vol.method)


def _combine_method(methods) -> str:
    methods = set(methods)
    if "monte-carlo" in methods:
        return "monte-carlo"
    if "closed-form-1d" in methods:
        return "closed-form-1d"
    return "closed-form"


def mean_series_terms(t_grid, model: DensityModel, region: RegionSpec, k_max: int,
                      mc_samples: int, seed: int,
                      closed_form: bool = True) -> list[tuple[np.ndarray, np.ndarray, str]]:
    """Per-``k`` diagonal terms ``psi_{k+1,k,k}(t, t)`` on a grid: ``(values, std_errors, method)``."""
    t_grid = np.asarray(t_grid, dtype=float)
    out = []
    for k in range(k_max + 1):
        tg = _term_grid(model.dimension, k, k, k + 1, t_grid, mc_samples, derive_key(seed, k, k, k + 1),
                        closed_form)
        c = _prefactor(model, region, k, k, k + 1)
        out.append((c * np.diag(tg.values).copy(), c * np.sqrt(np.diag(tg.var)), tg.method))
    return out


@dataclass
class MeanCurve:
    t_grid: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    method: str
    truncation: SeriesTruncation

    def to_dict(self) -> dict:
        return {"t_grid": self.t_grid.tolist(), "values": self.values.tolist(),
                "std_errors": self.std_errors.tolist(), "method": self.method,
                "truncation": asdict(self.truncation)}


def limit_mean_grid(t_grid, model: DensityModel, region: RegionSpec = ALL_SPACE,
                    epsilon: float = 1e-6, mc_samples: int = 100_000, seed: int = 0,
                    extra_terms: int = 0, closed_form: bool = True) -> MeanCurve:
    """Limit of ``n^-1 E[chi_{n,A}(t)]`` at every grid point, truncated for the largest t."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise ValueError("t must be nonnegative")
    trunc = mean_truncation(a_t(float(t_grid.max()), model.dimension, model.sup_norm()), epsilon)
    terms = mean_series_terms(t_grid, model, region, trunc.k_max + extra_terms, mc_samples, seed,
                              closed_form)
    values = np.zeros(len(t_grid))
    var = np.zeros(len(t_grid))
    for k, (v, se, _) in enumerate(terms):
        values += (-1) ** k * v
        var += se ** 2
    return MeanCurve(t_grid, values, np.sqrt(var), _combine_method(m for _, _, m in terms), trunc)


def limit_mean(t: float, model: DensityModel, region: RegionSpec = ALL_SPACE,
               epsilon: float = 1e-6, mc_samples: int = 100_000, seed: int = 0,
               extra_terms: int = 0, closed_form: bool = True) -> tuple[PsiEstimate, SeriesTruncation]:
    curve = limit_mean_grid([t], model, region, epsilon, mc_samples, seed, extra_terms, closed_form)
    n = mc_samples if curve.method == "monte-carlo" else 0
    est = PsiEstimate(float(curve.values[0]), float(curve.std_errors[0]), n, curve.method, curve.truncation)
    return est, curve.truncation


@dataclass
class CovarianceGrid:
    t_grid: np.ndarray
    matrix: np.ndarray
    std_errors: np.ndarray
    increment_se: np.ndarray | None = None
    psd_repair: float = 0.0
    truncation: SeriesTruncation | None = None
    method: str = "monte-carlo"
    terms: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.std_errors = np.asarray(self.std_errors, dtype=float)
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        g = len(self.t_grid)
        if self.matrix.shape != (g, g) or self.std_errors.shape != (g, g):
            raise ValueError("matrix and std_errors must be square over the grid")
        if not np.allclose(self.matrix, self.matrix.T, rtol=0, atol=1e-12):
            raise ValueError("covariance matrix must be symmetric")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def repaired(self, start: float = 1e-12, stop: float = 1e-8) -> "CovarianceGrid":
        """Copy with the smallest diagonal jitter (``start·tr`` ×10 up to ``stop·tr``) that factorises."""
        _, jitter = _jittered_cholesky(self.matrix, start, stop)
        out = CovarianceGrid(self.t_grid, self.matrix + jitter * np.eye(len(self.t_grid)),
                             self.std_errors, self.increment_se, self.psd_repair + jitter,
                             self.truncation, self.method, self.terms, dict(self.metadata))
        return out

    def to_dict(self) -> dict:
        return {"t_grid": self.t_grid.tolist(), "matrix": self.matrix.tolist(),
                "std_errors": self.std_errors.tolist(),
                "increment_se": None if self.increment_se is None else self.increment_se.tolist(),
                "psd_repair": self.psd_repair,
                "truncation": None if self.truncation is None else asdict(self.truncation),
                "method": self.method, "terms": self.terms, "metadata": self.metadata}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "CovarianceGrid":
        trunc = data.get("truncation")
        inc = data.get("increment_se")
        return cls(np.asarray(data["t_grid"]), np.asarray(data["matrix"]),
                   np.asarray(data["std_errors"]), None if inc is None else np.asarray(inc),
                   float(data.get("psd_repair", 0.0)),
                   None if trunc is None else SeriesTruncation(**trunc),
                   data.get("method", "monte-carlo"), int(data.get("terms", 0)),
                   dict(data.get("metadata", {})))

    @classmethod
    def from_json(cls, path) -> "CovarianceGrid":
        return cls.from_dict(json.loads(Path(path).read_text()))


def covariance_terms(k_max: int):
    """``(k1, k2, j)`` with ``k1 <= k2 <= k_max``; the mirrored ``k1 > k2`` terms are transposes."""
    for k1 in range(k_max + 1):
        for k2 in range(k1, k_max + 1):
            for j in range(1, k1 + 2):
                yield k1, k2, j


def covariance_grid(t_grid, model: DensityModel, region: RegionSpec = ALL_SPACE,
                    epsilon: float = 1e-4, mc_samples: int = 100_000, seed: int = 0,
                    jobs: int = 1, k_max: int | None = None) -> CovarianceGrid:
    """Limit covariance ``lim n^-1 Cov(chi_{n,A}(t_a), chi_{n,A}(t_b))`` on a grid.

    The double series is truncated at ``(K, K)`` with ``K`` the smallest
    order whose term-bound tail is at most ``epsilon`` (for ``a`` at the
    largest grid time); pass ``k_max`` to override.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be a nonempty strictly increasing nonnegative sequence")
    d = model.dimension
    a = a_t(float(t_grid.max()), d, model.sup_norm())
    trunc = covariance_truncation(a, epsilon)
    if k_max is not None:
        trunc = SeriesTruncation(k_max, covariance_tail_bound(a, k_max), a, epsilon, "covariance")
    terms = list(covariance_terms(trunc.k_max))

    def run(term):
        k1, k2, j = term
        return _term_grid(d, k1, k2, j, t_grid, mc_samples, derive_key(seed, k1, k2, j))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            grids = list(pool.map(run, terms))
    else:
        grids = [run(term) for term in terms]

    g = len(t_grid)
    total = np.zeros((g, g))
    var = np.zeros((g, g))
    inc_var = np.zeros(g)
    for (k1, k2, j), tg in zip(terms, grids):
        c = (-1) ** (k1 + k2) * _prefactor(model, region, k1, k2, j)
        se = np.sqrt(tg.var)
        if k1 == k2:
            total += c * 0.5 * (tg.values + tg.values.T)
            var += (c * 0.5 * (se + se.T)) ** 2
            inc_var += c ** 2 * tg.inc_var
        else:
            total += c * (tg.values + tg.values.T)
            var += (c * (se + se.T)) ** 2
            inc_var += 4.0 * c ** 2 * tg.inc_var
    total = 0.5 * (total + total.T)
    method = _combine_method(tg.method for tg in grids)
    meta = {"d": d, "model": model.to_dict(), "region": region.to_dict(), "seed": seed,
            "mc_samples": mc_samples}
    return CovarianceGrid(t_grid, total, np.sqrt(var), np.sqrt(inc_var), 0.0, trunc, method,
                          len(terms), meta)


def limit_covariance(t: float, s: float, model: DensityModel, region: RegionSpec = ALL_SPACE,
                     epsilon: float = 1e-4, mc_samples: int = 100_000, seed: int = 0,
                     jobs: int = 1) -> PsiEstimate:
    grid = np.array(sorted({float(t), float(s)}))
    cov = covariance_grid(grid, model, region, epsilon, mc_samples, seed, jobs)
    a = int(np.searchsorted(grid, t))
    b = int(np.searchsorted(grid, s))
    samples = mc_samples if cov.method == "monte-carlo" else 0
    return PsiEstimate(float(cov.matrix[a, b]), float(cov.std_errors[a, b]), samples, cov.method,
                       cov.truncation)


class FactorizationError(np.linalg.LinAlgError):
    pass


def _jittered_cholesky(matrix: np.ndarray, start: float = 1e-12, stop: float = 1e-8):
    matrix = np.asarray(matrix, dtype=float)
    g = len(matrix)
    tr = float(np.trace(matrix))
    try:
        return np.linalg.cholesky(matrix), 0.0
    except np.linalg.LinAlgError:
        pass
    if tr > 0:
        level = start
        while level <= stop * (1 + 1e-9):
            jitter = level * tr
            try:
                return np.linalg.cholesky(matrix + jitter * np.eye(g)), jitter
            except np.linalg.LinAlgError:
                level *= 10.0
    raise FactorizationError(
        f"covariance not positive definite after jitter {stop:g}·trace "
        f"(min eigenvalue {np.linalg.eigvalsh(matrix).min():.3g})")


@dataclass
class GPPath:
    t_grid: np.ndarray
    values: np.ndarray
    seed: int


def _factor(cov: CovarianceGrid) -> np.ndarray:
    if not np.any(cov.matrix):
        return np.zeros_like(cov.matrix)
    chol, _ = _jittered_cholesky(cov.matrix)
    return chol


def gp_sample_paths(cov: CovarianceGrid, seed: int, n_paths: int) -> np.ndarray:
    """``(n_paths, len(t_grid))`` zero-mean Gaussian draws with the grid covariance."""
    chol = _factor(cov)
    z = generator(seed).standard_normal((n_paths, len(cov.t_grid)))
    return z @ chol.T


def gp_sample(cov: CovarianceGrid, seed: int) -> GPPath:
    return GPPath(cov.t_grid.copy(), gp_sample_paths(cov, seed, 1)[0], seed)


@dataclass
class IncrementReport:
    t_left: np.ndarray
    t_right: np.ndarray
    increment_var: np.ndarray
    increment_se: np.ndarray
    ratios: np.ndarray
    C: float
    C_se: float
    negative: list[int]

    @property
    def ok(self) -> bool:
        return not self.negative

    def to_dict(self) -> dict:
        return {"t_left": self.t_left.tolist(), "t_right": self.t_right.tolist(),
                "increment_var": self.increment_var.tolist(),
                "increment_se": self.increment_se.tolist(), "ratios": self.ratios.tolist(),
                "C": self.C, "C_se": self.C_se, "negative": self.negative, "ok": self.ok}


def gp_increment_check(cov: CovarianceGrid) -> IncrementReport:
    """Smallest ``C`` with ``E[(H(t)-H(s))^2] <= C (t - s)`` over adjacent grid pairs.

    Pairs whose increment variance is negative beyond three standard errors
    are listed in ``negative``.
    """
    c, tg = cov.matrix, cov.t_grid
    a = np.arange(1, len(tg))
    inc = c[a, a] - c[a, a - 1] - c[a - 1, a] + c[a - 1, a - 1]
    if cov.increment_se is not None:
        se = cov.increment_se[a]
    else:
        e = cov.std_errors
        se = np.sqrt(e[a, a] ** 2 + e[a, a - 1] ** 2 + e[a - 1, a] ** 2 + e[a - 1, a - 1] ** 2)
    dt = tg[a] - tg[a - 1]
    ratios = inc / dt
    negative = [int(i) for i in np.flatnonzero(inc < -3.0 * se - 1e-12)]
    if len(ratios):
        top = int(np.argmax(ratios))
        big_c = max(float(ratios[top]), 0.0)
        c_se = float(se[top] / dt[top])
    else:
        big_c, c_se = 0.0, 0.0
    return IncrementReport(tg[a - 1], tg[a], inc, se, ratios, big_c, c_se, negative)


def refinement_stability(coarse: IncrementReport, fine: IncrementReport, tol: float = 0.25) -> dict:
    """Compare fitted Hölder constants of a grid and its refinement."""
    if coarse.C == 0.0:
        rel = 0.0 if fine.C == 0.0 else math.inf
    else:
        rel = abs(fine.C - coarse.C) / coarse.C
    return {"C_coarse": coarse.C, "C_fine": fine.C, "relative_change": rel,
            "stable": bool(rel <= tol), "tolerance": tol}


def psi_table_csv(rows, path=None) -> str:
    """``rows``: iterable of ``(j, k1, k2, t, s, PsiEstimate)``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "k1", "k2", "t", "s", "value", "std_error", "samples"])
    for j, k1, k2, t, s, est in rows:
        w.writerow([j, k1, k2, repr(float(t)), repr(float(s)), repr(float(est.value)),
                    repr(float(est.std_error)), est.samples])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
