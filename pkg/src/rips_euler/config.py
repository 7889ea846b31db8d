"""YAML run configuration: strict schema, overrides and object builders."""
from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema
import yaml

from .harness import MIN_FCLT_REPS, CampaignConfig
from .point_process import DensityModel, density_from_dict
from .region import RegionSpec


class ConfigError(ValueError):
    pass


_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}]}
_box = {"type": "object", "additionalProperties": False, "required": ["lo", "hi"],
        "properties": {"lo": _vec, "hi": _vec}}


def _strict(props, required=()):
    return {"type": "object", "additionalProperties": False, "properties": props,
            "required": list(required)}


DENSITY_SCHEMA = {"oneOf": [
    _strict({"kind": {"const": "uniform-cube"}, "dimension": {"type": "integer", "minimum": 1},
             "side": _pos, "center": _vec}, ["kind", "dimension"]),
    _strict({"kind": {"const": "truncated-gaussian"}, "dimension": {"type": "integer", "minimum": 1},
             "mean": _vec, "sigma": _pos, "box": _box}, ["kind", "dimension", "mean", "sigma", "box"]),
    _strict({"kind": {"const": "piecewise-constant"}, "dimension": {"type": "integer", "minimum": 1},
             "lo": _vec, "hi": _vec, "weights": {"type": "array"}},
            ["kind", "dimension", "lo", "hi", "weights"]),
]}

REGION_SCHEMA = {"oneOf": [
    _strict({"kind": {"const": "all-space"}}, ["kind"]),
    _strict({"kind": {"const": "box"}, "lo": _vec, "hi": _vec}, ["kind", "lo", "hi"]),
]}

_times = {"type": "array", "items": _nonneg, "minItems": 1}
_count = {"type": "integer", "minimum": 1}

SCHEMA = _strict({
    "density": DENSITY_SCHEMA,
    "scaling": _strict({"n": _nonneg}, ["n"]),
    "grid": _strict({"t": _times, "s": _times, "t_max": _nonneg}),
    "region": REGION_SCHEMA,
    "input": _strict({"points": {"type": "string"}}, ["points"]),
    "psi": _strict({"j": _count, "k1": {"type": "integer", "minimum": 0},
                    "k2": {"type": "integer", "minimum": 0}}, ["j", "k1", "k2"]),
    "series": _strict({"epsilon": _pos, "mean_epsilon": _pos, "mc_samples": _count}),
    "campaign": _strict({"n_values": {"type": "array", "items": _pos, "minItems": 1},
                         "replications": {"type": "integer", "minimum": 2},
                         "centering": {"enum": ["empirical", "limit"]},
                         "require_exact": {"type": "boolean"}},
                        ["n_values", "replications"]),
    "palm": _strict({"n": _pos, "k": {"type": "integer", "minimum": 0}, "radius": _nonneg,
                     "replications": {"type": "integer", "minimum": 2}, "mc_samples": _count,
                     "pairs": {"type": "boolean"}}, ["n", "k", "radius", "replications"]),
    "gp": _strict({"paths": _count}),
    "output": _strict({"dir": {"type": "string"}}),
    "seeds": _strict({"base": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1}}),
    "jobs": _count,
    "dim_cap": {"type": ["integer", "null"], "minimum": 0},
    "clique_budget": _count,
}, ["density"])

# sections each subcommand cannot run without
REQUIRED = {
    "sample": ["scaling"],
    "euler-curve": ["scaling", "grid"],
    "psi": ["psi", "grid"],
    "limit-mean": ["grid"],
    "covariance": ["grid"],
    "gp-sample": ["grid"],
    "slln": ["campaign", "grid"],
    "fclt": ["campaign", "grid"],
    "moments": ["campaign", "grid"],
    "palm-check": ["palm"],
}

DEFAULTS = {"epsilon": 1e-4, "mean_epsilon": 1e-6, "mc_samples": 100_000, "seed": 0, "jobs": 1}


def load(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def apply_overrides(cfg: dict, seed=None, jobs=None, eps=None, reps=None, dim_cap=None) -> dict:
    """Command-line values win over file values."""
    out = copy.deepcopy(cfg)
    if seed is not None:
        out.setdefault("seeds", {})["base"] = seed
    if jobs is not None:
        out["jobs"] = jobs
    if eps is not None:
        out.setdefault("series", {})["epsilon"] = eps
    if reps is not None:
        if "campaign" in out:
            out["campaign"]["replications"] = reps
        if "palm" in out:
            out["palm"]["replications"] = reps
    if dim_cap is not None:
        out["dim_cap"] = dim_cap
    return out


def validate(cfg: dict, command: str) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    missing = [s for s in REQUIRED[command] if s not in cfg]
    if missing:
        raise ConfigError(f"{command} needs section(s): {', '.join(missing)}")
    if "input" in cfg and not Path(cfg["input"]["points"]).is_file():
        raise ConfigError(f"input points file not found: {cfg['input']['points']}")
    if "grid" in cfg and command not in ("sample", "palm-check", "euler-curve") and "t" not in cfg["grid"]:
        raise ConfigError(f"{command} needs grid.t")
    for key in ("t",):
        ts = cfg.get("grid", {}).get(key)
        if ts is not None and command != "psi" and any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("grid.t must be strictly increasing")
    try:
        model = build_model(cfg)
        region = build_region(cfg)
        if not region.is_all and len(region.lo) != model.dimension:
            raise ConfigError("region dimension does not match the density")
        if command in ("slln", "fclt", "moments"):
            build_campaign(cfg)
        if command == "fclt" and cfg["campaign"]["replications"] < MIN_FCLT_REPS:
            raise ConfigError(f"fclt needs at least {MIN_FCLT_REPS} replications")
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def config_hash(cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k != "output"}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def seed(cfg: dict) -> int:
    return int(cfg.get("seeds", {}).get("base", DEFAULTS["seed"]))


def series(cfg: dict, key: str):
    return cfg.get("series", {}).get(key, DEFAULTS[key])


def jobs(cfg: dict) -> int:
    return int(cfg.get("jobs", DEFAULTS["jobs"]))


def build_model(cfg: dict) -> DensityModel:
    return density_from_dict(cfg["density"])


def build_region(cfg: dict) -> RegionSpec:
    reg = cfg.get("region")
    if reg is None or reg["kind"] == "all-space":
        return RegionSpec()
    return RegionSpec.box(reg["lo"], reg["hi"])


def build_campaign(cfg: dict) -> CampaignConfig:
    camp = cfg["campaign"]
    return CampaignConfig(
        model=build_model(cfg), n_values=camp["n_values"], t_grid=cfg["grid"]["t"],
        replications=camp["replications"], base_seed=seed(cfg),
        epsilon=series(cfg, "epsilon"), mean_epsilon=series(cfg, "mean_epsilon"),
        mc_samples=series(cfg, "mc_samples"), region=build_region(cfg),
        dim_cap=cfg.get("dim_cap"), require_exact=camp.get("require_exact", True),
        centering=camp.get("centering", "empirical"), jobs=jobs(cfg))
