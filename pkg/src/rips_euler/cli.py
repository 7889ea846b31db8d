"""``rips-euler`` command line.

Exit status: 0 success, 2 invalid config, 3 acceptance gate failed,
4 computational guard tripped (clique budget, series cap, factorisation).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
import yaml

from . import config as C
from ._accel import backend
from .harness import CappedCurveRefused, run_fclt, run_moment_asymptotics, run_palm_check, run_slln
from .limits import (FactorizationError, TruncationCapExceeded, covariance_grid, gp_increment_check,
                     gp_sample_paths, limit_mean_grid, psi, psi_table_csv)
from .point_process import PointCloud, SamplingError, ScalingContext, sample_poisson
from .rips import DEFAULT_CLIQUE_BUDGET, CliqueBudgetExceeded, euler_curve

OUTPUT_ROOT_ENV = "RIPS_EULER_OUTPUT_ROOT"
EXIT_OK, EXIT_INVALID, EXIT_GATE, EXIT_GUARD = 0, 2, 3, 4
COMMANDS = tuple(C.REQUIRED)


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "numba", "pyyaml", "jsonschema"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _write(out: Path, name: str, text: str, written: list) -> None:
    (out / name).write_text(text)
    written.append(name)


def _input_hashes(cfg) -> dict:
    path = cfg.get("input", {}).get("points")
    if path is None or not Path(path).is_file():
        return {}
    return {path: hashlib.sha256(Path(path).read_bytes()).hexdigest()}


def _grid(cfg):
    return np.asarray(cfg["grid"]["t"], dtype=float)


def _cmd_sample(cfg, out, written):
    model = C.build_model(cfg)
    cloud = sample_poisson(model, ScalingContext(cfg["scaling"]["n"], model.dimension), C.seed(cfg))
    _write(out, "points.csv", cloud.to_csv(), written)
    return True


def _cmd_euler_curve(cfg, out, written):
    model = C.build_model(cfg)
    ctx = ScalingContext(cfg["scaling"]["n"], model.dimension)
    if "input" in cfg:
        cloud = PointCloud.from_csv(cfg["input"]["points"], ctx, C.seed(cfg))
    else:
        cloud = sample_poisson(model, ctx, C.seed(cfg))
    grid = cfg["grid"]
    t_max = grid.get("t_max", max(grid.get("t", [0.0])))
    curve = euler_curve(cloud, t_max, C.build_region(cfg), cfg.get("dim_cap"),
                        cfg.get("clique_budget", DEFAULT_CLIQUE_BUDGET))
    _write(out, "curve.csv", curve.to_csv(), written)
    _write(out, "curve.json", curve.to_json(), written)
    return True


def _cmd_psi(cfg, out, written):
    model, region = C.build_model(cfg), C.build_region(cfg)
    p = cfg["psi"]
    ts = cfg["grid"]["t"]
    ss = cfg["grid"].get("s", ts)
    rows = []
    for t in ts:
        for s in ss:
            est = psi(p["j"], p["k1"], p["k2"], t, s, model, region, C.series(cfg, "mc_samples"), C.seed(cfg))
            rows.append((p["j"], p["k1"], p["k2"], t, s, est))
    _write(out, "psi.csv", psi_table_csv(rows), written)
    return True


def _cmd_limit_mean(cfg, out, written):
    curve = limit_mean_grid(_grid(cfg), C.build_model(cfg), C.build_region(cfg), C.series(cfg, "epsilon"),
                            C.series(cfg, "mc_samples"), C.seed(cfg))
    _write(out, "limit_mean.json", json.dumps(curve.to_dict(), indent=2, sort_keys=True) + "\n", written)
    return True


def _covariance(cfg):
    return covariance_grid(_grid(cfg), C.build_model(cfg), C.build_region(cfg), C.series(cfg, "epsilon"),
                           C.series(cfg, "mc_samples"), C.seed(cfg), C.jobs(cfg))


def _cmd_covariance(cfg, out, written):
    cov = _covariance(cfg)
    _write(out, "covariance.json", cov.to_json(), written)
    _write(out, "increments.json",
           json.dumps(gp_increment_check(cov).to_dict(), indent=2, sort_keys=True) + "\n", written)
    return True


def _cmd_gp_sample(cfg, out, written):
    cov = _covariance(cfg).repaired()
    paths = gp_sample_paths(cov, C.seed(cfg), cfg.get("gp", {}).get("paths", 1))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path"] + [repr(float(t)) for t in cov.t_grid])
    for i, row in enumerate(paths):
        w.writerow([i] + [repr(float(v)) for v in row])
    _write(out, "covariance.json", cov.to_json(), written)
    _write(out, "gp_paths.csv", buf.getvalue(), written)
    return True


def _report(rep, out, written):
    _write(out, "report.json", rep.to_json(), written)
    _write(out, "comparison.csv", rep.to_csv(), written)
    return rep.passed


def _cmd_palm(cfg, out, written):
    p = cfg["palm"]
    rep = run_palm_check(C.build_model(cfg), p["n"], p["k"], p["radius"], p["replications"], C.seed(cfg),
                         p.get("mc_samples", 1_000_000), p.get("pairs", True))
    return _report(rep, out, written)


HANDLERS = {
    "sample": _cmd_sample,
    "euler-curve": _cmd_euler_curve,
    "psi": _cmd_psi,
    "limit-mean": _cmd_limit_mean,
    "covariance": _cmd_covariance,
    "gp-sample": _cmd_gp_sample,
    "slln": lambda cfg, out, w: _report(run_slln(C.build_campaign(cfg)), out, w),
    "fclt": lambda cfg, out, w: _report(run_fclt(C.build_campaign(cfg)), out, w),
    "moments": lambda cfg, out, w: _report(run_moment_asymptotics(C.build_campaign(cfg)), out, w),
    "palm-check": _cmd_palm,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rips-euler", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="YAML run configuration")
        p.add_argument("--out", help="output directory (default: output.dir, then $%s)" % OUTPUT_ROOT_ENV)
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--eps", type=float)
        p.add_argument("--reps", type=int)
        p.add_argument("--dim-cap", type=int)
    return ap


def _output_dir(args, cfg, digest) -> Path:
    if args.out:
        return Path(args.out)
    if "output" in cfg and "dir" in cfg["output"]:
        return Path(cfg["output"]["dir"])
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    return root / f"{args.command}-{digest[:12]}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = C.apply_overrides(C.load(args.config), args.seed, args.jobs, args.eps, args.reps, args.dim_cap)
        if isinstance(cfg.get("input"), dict) and isinstance(cfg["input"].get("points"), str):
            # input paths are relative to the config file
            cfg["input"]["points"] = str((Path(args.config).parent / cfg["input"]["points"]).resolve())
        C.validate(cfg, args.command)
    except (C.ConfigError, CappedCurveRefused) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    digest = C.config_hash(cfg)
    out = _output_dir(args, cfg, digest)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    t0 = time.perf_counter()
    try:
        ok = HANDLERS[args.command](cfg, out, written)
        status = EXIT_OK if ok else EXIT_GATE
    except CappedCurveRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        status = EXIT_INVALID
    except (CliqueBudgetExceeded, TruncationCapExceeded, FactorizationError, SamplingError) as exc:
        print(f"guard tripped: {exc}", file=sys.stderr)
        status = EXIT_GUARD
    wall = time.perf_counter() - t0
    _write(out, "config.yaml", yaml.safe_dump(cfg, sort_keys=True), written)
    manifest = {
        "command": args.command,
        "config_hash": digest,
        "effective_config": cfg,
        "seeds": {"base": C.seed(cfg)},
        "versions": _versions(),
        "backend": backend(),
        "wall_time_s": wall,
        "exit_status": status,
        "inputs": _input_hashes(cfg),
        "artifacts": {name: hashlib.sha256((out / name).read_bytes()).hexdigest() for name in written},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if status == EXIT_GATE:
        print("acceptance gate failed", file=sys.stderr)
    print(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
