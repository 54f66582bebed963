"""Command line entry point: ``twomode <subcommand> [--config FILE] [flags]``.

Each subcommand reads its own section of a TOML config (``[ground_sweep]``,
``[scaling]``, ``[dynamics]``, ``[expansion]``, ``[selftest]``) plus the shared
``[run]`` section (``threads``, ``seed``, ``out``).  Flags override config keys.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from . import experiments as ex
from .dynamics import ConfigurationError, IntegrationError

log = logging.getLogger("twomode")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3
DEFAULT_SEED = 20240601


class ConfigError(ValueError):
    pass


# --- output -------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return "" if v is None else str(v)


def write_csv(rows: list[dict], path: Path) -> None:
    """RFC 4180: comma separated, CRLF line ends, quoting only where needed."""
    columns: list[str] = []
    for r in rows:
        columns += [k for k in r if k not in columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(r.get(c)) for c in columns])


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(v.item())
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_outputs(out_dir: Path, name: str, rows: list[dict], config: dict, extra: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    write_csv(rows, path)
    side = {"command": name, "version": __version__, "config": config, **extra}
    with open(out_dir / f"{name}.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(side), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# --- config -------------------------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _split(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _n_entries(text: str) -> list:
    return [s if s.startswith("pair:") else int(s) for s in _split(text)]


def _floats(text: str) -> list[float]:
    return [float(s) for s in _split(text)]


def _section(cfg: dict, name: str, allowed) -> dict:
    sec = dict(cfg.get(name, {}))
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
    return sec


def _fields(cls) -> list[str]:
    return [f.name for f in dataclasses.fields(cls)]


def _build(cls, kwargs: dict):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{cls.__name__}: {exc}") from exc


def sweep_spec(cfg: dict, args) -> ex.SweepSpec:
    sec = _section(cfg, "ground_sweep", _fields(ex.SweepSpec) + ["g_min", "g_max", "points"])
    if args.n is not None:
        sec["n_list"] = _n_entries(args.n)
    if args.g_param is not None:
        sec["g_param_grid"] = _floats(args.g_param)
    grid_keys = {k: sec.pop(k) for k in ("g_min", "g_max", "points") if k in sec}
    if "g_param_grid" not in sec:
        sec["g_param_grid"] = list(ex.default_g_grid(
            int(grid_keys.get("points", 61)), grid_keys.get("g_min", 1e-2), grid_keys.get("g_max", 1e6)))
    if "n_list" not in sec:
        raise ConfigError("ground-sweep needs n_list (config) or --n")
    return _build(ex.SweepSpec, sec)


def scaling_spec(cfg: dict, args) -> ex.ScalingSpec:
    sec = _section(cfg, "scaling", _fields(ex.ScalingSpec) + ["n_min", "n_max", "n_step"])
    if args.g_param is not None:
        raise ConfigError("--g-param does not apply to scaling (G is fixed by the branch)")
    if args.n is not None:
        sec["n_range"] = _n_entries(args.n)
    rng = {k: sec.pop(k) for k in ("n_min", "n_max", "n_step") if k in sec}
    if "n_range" not in sec:
        sec["n_range"] = list(range(int(rng.get("n_min", 10)), int(rng.get("n_max", 200)) + 1,
                                    int(rng.get("n_step", 10))))
    if "fit_window" in sec:
        sec["fit_window"] = tuple(sec["fit_window"])
    return _build(ex.ScalingSpec, sec)


def dynamics_config(cfg: dict, args) -> ex.DynamicsConfig:
    sec = _section(cfg, "dynamics", _fields(ex.DynamicsConfig))
    if args.n is not None:
        sec["n"] = int(args.n)
    if args.g_param is not None:
        sec["target_g_param"] = float(args.g_param)
    return _build(ex.DynamicsConfig, sec)


def expansion_config(cfg: dict, args) -> ex.ExpansionConfig:
    sec = _section(cfg, "expansion", _fields(ex.ExpansionConfig))
    if args.n is not None:
        sec["n"] = int(args.n)
    if args.g_param is not None:
        sec["g_param"] = float(args.g_param)
    return _build(ex.ExpansionConfig, sec)


# --- commands -----------------------------------------------------------------

def cmd_ground_sweep(cfg, args, out):
    spec = sweep_spec(cfg, args)
    rows = ex.ground_sweep(spec, threads=args.threads)
    bad = sum(1 for r in rows if r.get("error"))
    write_outputs(out, "ground_sweep", rows, dataclasses.asdict(spec), {"failed_points": bad})
    if bad:
        log.warning("%d of %d sweep points failed; see the error column", bad, len(rows))
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_scaling(cfg, args, out):
    spec = scaling_spec(cfg, args)
    rows, exponent, residual = ex.scaling_study(spec, threads=args.threads)
    excluded = sum(r["excluded"] for r in rows)
    write_outputs(out, "scaling", rows, dataclasses.asdict(spec),
                  {"exponent": exponent, "fit_residual": residual, "excluded_points": excluded})
    print(f"{spec.branch}: exponent {exponent:.4f} (rms log residual {residual:.3g})")
    return EXIT_PARTIAL if excluded else EXIT_OK


def cmd_dynamics(cfg, args, out):
    conf = dynamics_config(cfg, args)
    side = dataclasses.asdict(conf)
    try:
        traj = ex.run_dynamics(conf)
    except IntegrationError as exc:
        log.error("%s", exc)
        if exc.trajectory is None or not exc.trajectory.records:
            return EXIT_NUMERIC
        write_outputs(out, "dynamics", ex.trajectory_rows(exc.trajectory, conf), side, {"error": str(exc)})
        return EXIT_PARTIAL
    for w in traj.warnings:
        log.warning("%s", w)
    rows = ex.trajectory_rows(traj, conf)
    write_outputs(out, "dynamics", rows, side, {"meta": traj.meta, "warnings": traj.warnings})
    return EXIT_OK


def cmd_expansion(cfg, args, out):
    conf = expansion_config(cfg, args)
    rows = ex.expansion_render(conf)
    write_outputs(out, "expansion", rows, dataclasses.asdict(conf), {})
    return EXIT_OK


def cmd_selftest(cfg, args, out):
    from .oracle import oracle_equivalence

    sec = _section(cfg, "selftest", ["n_max", "draws", "tolerance"])
    if args.n is not None:
        sec["n_max"] = int(args.n)
    tol = float(sec.get("tolerance", 1e-10))
    rep = oracle_equivalence(int(sec.get("n_max", 12)), int(sec.get("draws", 20)), args.seed)
    ok = rep.passed(tol)
    print(
        f"oracle equivalence over {rep.cases} cases: max |dE| {rep.max_energy_error:.2e}, "
        f"max |d|c_m|| {rep.max_amplitude_error:.2e} -> {'PASS' if ok else 'FAIL'}"
    )
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "ground-sweep": cmd_ground_sweep,
    "scaling": cmd_scaling,
    "dynamics": cmd_dynamics,
    "expansion": cmd_expansion,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twomode", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--out", help="output directory (default: results)")
        p.add_argument("--n", help="particle number(s); comma list, 'pair:N' allowed in sweeps")
        p.add_argument("--g-param", dest="g_param", help="G value(s); comma list for sweeps")
        p.add_argument("--threads", type=int, help="worker threads for sweeps")
        p.add_argument("--seed", type=int, help="seed for randomised checks")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        run = _section(cfg, "run", ["threads", "seed", "out"])
        args.threads = args.threads if args.threads is not None else int(run.get("threads", 1))
        args.seed = args.seed if args.seed is not None else int(run.get("seed", DEFAULT_SEED))
        if args.threads < 1:
            raise ConfigError("threads must be >= 1")
        out = Path(args.out if args.out is not None else run.get("out", "results"))
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, ConfigurationError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (ArithmeticError, IntegrationError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
