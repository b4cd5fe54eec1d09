"""Experiment runner: INI configuration, report files and exit codes.

Config files have an ``[experiment]`` section (``name``, ``seed``, ``out``)
and a ``[parameters]`` section whose keys override the experiment defaults::

    [experiment]
    name = mehler_vs_series
    seed = 0

    [parameters]
    times = 0.05, 0.2, 1, 2
    K = 60

Exit codes: 0 pass, 1 tolerance failure, 2 configuration or precondition
error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError
from .experiments import REGISTRY, Check, ExperimentResult, experiment

EXIT_PASS, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3
MIN_POINTS_PER_UNIT = 8.0


@dataclass
class ExperimentConfig:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: Path = Path("results")

    def resolved(self) -> dict:
        return {"experiment": self.name, "seed": self.seed, "parameters": dict(self.params)}


def _coerce(key: str, raw, default):
    """Parse ``raw`` into the type of ``default``."""
    if not isinstance(raw, str):
        return raw
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, list):
            items = [s.strip() for s in raw.strip().strip("[]").split(",") if s.strip()]
            proto = default[0] if default else 0.0
            return [_coerce(key, s, proto) for s in items]
        return raw.strip()
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r} as {type(default).__name__}", key) from None


def _validate(name: str, params: dict):
    for key, v in params.items():
        if key.startswith("tol"):
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"tolerance {key} must be a positive finite number", key)
    if "box_half_width" in params and "box_modes" in params:
        if params["box_modes"] / (2.0 * params["box_half_width"]) < MIN_POINTS_PER_UNIT:
            raise ConfigError(f"box resolution below {MIN_POINTS_PER_UNIT:g} points per unit length", "box_modes")
    if "grid_points" in params:
        span = params["grid_hi"] - params["grid_lo"]
        if span <= 0:
            raise ConfigError("grid_hi must exceed grid_lo", "grid_hi")
        if (params["grid_points"] - 1) / span < MIN_POINTS_PER_UNIT:
            raise ConfigError(f"grid resolution below {MIN_POINTS_PER_UNIT:g} points per unit length", "grid_points")
    if "lattice_step" in params and not 0 < params["lattice_step"] <= 1.0 / MIN_POINTS_PER_UNIT:
        raise ConfigError(f"lattice_step must lie in (0, {1 / MIN_POINTS_PER_UNIT:g}]", "lattice_step")


def make_config(name: str, overrides: dict | None = None, seed: int = 0, out=None) -> ExperimentConfig:
    if name not in REGISTRY:
        raise ConfigError(f"unknown experiment {name!r}", "experiment")
    defaults = REGISTRY[name].defaults
    params = dict(defaults)
    for key, raw in (overrides or {}).items():
        if key not in defaults:
            raise ConfigError(f"unknown parameter {key!r} for experiment {name}", key)
        params[key] = _coerce(key, raw, defaults[key])
    _validate(name, params)
    return ExperimentConfig(name, params, int(seed), Path(out) if out is not None else Path("results"))


def load_config(path, name: str | None = None, seed: int | None = None, out=None) -> ExperimentConfig:
    """Read an INI config; explicit arguments win over file entries."""
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep parameter names case-sensitive (K)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config: {exc}", "config") from None
    for section in cp.sections():
        if section not in ("experiment", "parameters"):
            raise ConfigError(f"unknown section [{section}]", section)
    exp = dict(cp["experiment"]) if cp.has_section("experiment") else {}
    for key in exp:
        if key not in ("name", "seed", "out"):
            raise ConfigError(f"unknown key {key!r} in [experiment]", key)
    name = name or exp.get("name")
    if not name:
        raise ConfigError("no experiment named", "name")
    if seed is None:
        try:
            seed = int(exp.get("seed", 0))
        except ValueError:
            raise ConfigError("seed must be an integer", "seed") from None
    out = out if out is not None else exp.get("out")
    params = dict(cp["parameters"]) if cp.has_section("parameters") else {}
    return make_config(name, params, seed, out)


def _plain(v):
    """JSON-safe copy with non-finite floats as strings."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, Path):
        return str(v)
    return v


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def summarize(cfg: ExperimentConfig, res: ExperimentResult, runtime: float) -> dict:
    return _plain({
        "experiment": cfg.name,
        "parameters": cfg.resolved(),
        "metrics": res.metrics,
        "checks": {k: {"value": c.value, "tolerance": c.tolerance, "relation": c.relation, "pass": c.passed}
                   for k, c in res.checks.items()},
        "info": res.info,
        "pass": res.passed,
        "seed": cfg.seed,
        "runtime_seconds": round(runtime, 3),
    })


def run_experiment(cfg: ExperimentConfig) -> tuple[dict, int]:
    """Run one experiment and write ``<name>.csv``, ``<name>.json`` (and ``<name>_series.csv``).

    Returns the JSON summary and the exit code; library errors propagate.
    """
    exp = REGISTRY[cfg.name]
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    res = exp.func(cfg.params, rng)
    runtime = time.perf_counter() - t0
    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.out / f"{cfg.name}.csv", res.columns, res.rows)
    if res.series is not None:
        _write_csv(cfg.out / f"{cfg.name}_series.csv", ["x", "value"], res.series)
    summary = summarize(cfg, res, runtime)
    with open(cfg.out / f"{cfg.name}.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary, EXIT_PASS if res.passed else EXIT_TOLERANCE


def _summary_without_runtime(path: Path) -> bytes:
    lines = path.read_bytes().splitlines(keepends=True)
    return b"".join(ln for ln in lines if b'"runtime_seconds"' not in ln)


@experiment("determinism", criterion=15, targets=["martingale_identity", "lusin_probe", "covering", "polarization_hermite"],
            repeats=2)
def determinism(p, rng):
    """Re-run experiments with the same seed and compare their JSON summaries byte for byte."""
    seed = int(rng.integers(2**31))
    rows, same = [], {}
    for name in p["targets"]:
        blobs = []
        for i in range(p["repeats"]):
            with tempfile.TemporaryDirectory() as tmp:
                run_experiment(make_config(name, seed=seed, out=tmp))
                blobs.append(_summary_without_runtime(Path(tmp) / f"{name}.json"))
        ok = all(b == blobs[0] for b in blobs)
        same[name] = Check.truth(ok)
        rows.append((name, seed, p["repeats"], len(blobs[0]), ok))
    return ExperimentResult(["target", "seed", "repeats", "summary_bytes", "identical"], rows,
                            {"identical": {k: c.passed for k, c in same.items()}}, same)


def error_object(exc: BaseException) -> tuple[dict, int]:
    if isinstance(exc, ConfigError):
        return {"error": "config", "key": exc.key, "message": str(exc)}, EXIT_CONFIG
    if isinstance(exc, ConvergenceError):
        est = getattr(exc, "estimate", None)
        return {"error": "convergence", "type": type(exc).__name__, "message": str(exc),
                "estimate": _plain(est)}, EXIT_CONVERGENCE
    return {"error": "precondition", "type": type(exc).__name__, "message": str(exc)}, EXIT_CONFIG


def _parse_sets(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", item)
        k, v = item.split("=", 1)
        out[k.strip()] = v
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="heatlp", description="Run a named heat-semigroup experiment.")
    ap.add_argument("--experiment", help="experiment name (see --list)")
    ap.add_argument("--config", help="INI file with [experiment] and [parameters] sections")
    ap.add_argument("--out", help="output directory (default: results)")
    ap.add_argument("--seed", type=int, help="random seed (default 0)")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter")
    ap.add_argument("--list", action="store_true", help="list experiments and exit")
    args = ap.parse_args(argv)

    if args.list:
        for name, exp in sorted(REGISTRY.items()):
            tag = f"[criterion {exp.criterion}]" if exp.criterion else "[extra]"
            print(f"{name:28s} {tag:15s} {exp.description}")
        return EXIT_PASS
    try:
        sets = _parse_sets(args.set)
        if args.config:
            cfg = load_config(args.config, args.experiment, args.seed, args.out)
            if sets:
                merged = {**{k: v for k, v in cfg.params.items()}, **sets}
                cfg = make_config(cfg.name, merged, cfg.seed, cfg.out)
        elif args.experiment:
            cfg = make_config(args.experiment, sets, args.seed or 0, args.out)
        else:
            raise ConfigError("give --experiment or --config (or --list)", "experiment")
        summary, code = run_experiment(cfg)
    except (ValueError, ArithmeticError, NotImplementedError) as exc:
        err, code = error_object(exc)
        print(json.dumps(err, sort_keys=True))
        return code
    status = "PASS" if code == EXIT_PASS else "FAIL"
    print(json.dumps({"experiment": cfg.name, "status": status, "out": str(cfg.out),
                      "checks": {k: v["pass"] for k, v in summary["checks"].items()}}, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
