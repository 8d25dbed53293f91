"""Command-line runner: build, solve and analyse configured oscillator pairs.

    qsync run <config> --out <dir> [--workers N] [--grid-points M]
    qsync sweep <config> --out <dir> [--workers N]
    qsync validate <config>

Exit codes: 0 success, 2 config error, 3 solver failure, 4 truncation too coarse.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hilbert import CompositeSpace, SpaceError, SystemSpec, grouping_permutation, inverse_permutation
from .infomeasures import (
    BipartiteSplit,
    is_x_state,
    mutual_information,
    negativity,
    relative_entropy_of_coherence,
    x_state_discord,
)
from .lindblad import SolverError, steady_state, truncation_check
from .phase import MethodError, QuadratureError, _check_pair_method
from .scenarios import InteractionSpec, ScenarioError, build_scenario, check_compatible
from .subsets import harmonic_report

log = logging.getLogger("qsync")

EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, EXIT_TRUNCATION = 0, 2, 3, 4
OUTPUTS = ("phase_dist", "subset_report", "density_matrix", "measures")
DIGITS = 15

_TOP_KEYS = {"systems", "interaction", "methods", "grid_points", "outputs", "sweep", "truncation"}
_REQUIRED = {"systems", "interaction", "methods", "outputs"}
_SYSTEM_KEYS = {"kind", "omega", "gamma_g", "gamma_l", "n_max", "s"}
_INTERACTION_KEYS = {"kind", "strength"}
_SWEEP_KEYS = {"axes", "ranges"}
_TRUNCATION_KEYS = {"tail_levels", "threshold"}
#: sweep axis that sets the second frequency to omega_1 + value
DETUNING_AXIS = "detuning"


class ConfigError(ValueError):
    pass


class TruncationError(RuntimeError):
    def __init__(self, tail: float, threshold: float):
        super().__init__(f"tail population {tail:.6e} exceeds threshold {threshold:.1e}")
        self.tail = tail


@dataclass
class RunConfig:
    systems: tuple[SystemSpec, SystemSpec]
    interaction: InteractionSpec
    methods: list[str]
    outputs: list[str]
    grid_points: int = 512
    sweep_axes: list[str] = field(default_factory=list)
    sweep_ranges: list[tuple[float, float, int]] = field(default_factory=list)
    tail_levels: int = 2
    tail_threshold: float = 1e-6
    raw: dict = field(default_factory=dict, repr=False)


def _num(x) -> str:
    return format(float(x), f".{DIGITS}g")


def _jnum(x) -> float:
    return float(_num(x))


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(extra)}")


def _system(obj: dict, where: str) -> SystemSpec:
    _reject_unknown(obj, _SYSTEM_KEYS, where)
    if "kind" not in obj:
        raise ConfigError(f"{where} needs a kind")
    try:
        return SystemSpec(**obj)
    except (SpaceError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(data: dict) -> RunConfig:
    """Validate a config mapping and build a :class:`RunConfig`."""
    _reject_unknown(data, _TOP_KEYS, "config")
    missing = sorted(_REQUIRED - set(data))
    if missing:
        raise ConfigError(f"missing field(s): {', '.join(missing)}")

    systems = data["systems"]
    if not isinstance(systems, list) or len(systems) != 2:
        raise ConfigError("systems must list exactly two subsystems")
    specs = tuple(_system(s, f"systems.{i}") for i, s in enumerate(systems))

    inter = data["interaction"]
    _reject_unknown(inter, _INTERACTION_KEYS, "interaction")
    try:
        interaction = InteractionSpec(inter.get("kind", "none"), float(inter.get("strength", 0.0)))
        space = CompositeSpace(specs)
        check_compatible(space, interaction)
    except (ScenarioError, SpaceError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    methods = data["methods"]
    if not isinstance(methods, list) or not methods:
        raise ConfigError("methods must be a non-empty list")
    for m in methods:
        try:
            _check_pair_method(space.pair_type, m)
        except MethodError as exc:
            raise ConfigError(str(exc)) from exc
    if len(set(methods)) != len(methods):
        raise ConfigError("methods must not repeat")

    outputs = data["outputs"]
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("outputs must be a non-empty list")
    bad = [o for o in outputs if o not in OUTPUTS]
    if bad:
        raise ConfigError(f"unknown output(s): {', '.join(map(str, bad))}")

    grid_points = data.get("grid_points", 512)
    if not isinstance(grid_points, int) or isinstance(grid_points, bool) or grid_points < 3:
        raise ConfigError("grid_points must be an integer >= 3")

    cfg = RunConfig(specs, interaction, list(methods), list(outputs), grid_points, raw=data)

    trunc = data.get("truncation", {})
    _reject_unknown(trunc, _TRUNCATION_KEYS, "truncation")
    cfg.tail_levels = int(trunc.get("tail_levels", 2))
    cfg.tail_threshold = float(trunc.get("threshold", 1e-6))
    if cfg.tail_levels < 1:
        raise ConfigError("truncation.tail_levels must be >= 1")

    if "sweep" in data:
        sweep = data["sweep"]
        _reject_unknown(sweep, _SWEEP_KEYS, "sweep")
        axes, ranges = sweep.get("axes"), sweep.get("ranges")
        if not isinstance(axes, list) or not isinstance(ranges, list):
            raise ConfigError("sweep needs axes and ranges lists")
        if not 1 <= len(axes) <= 2 or len(axes) != len(ranges):
            raise ConfigError("sweep needs one or two axes, each with a range")
        for axis, rng in zip(axes, ranges):
            if not (isinstance(rng, list) and len(rng) == 3):
                raise ConfigError(f"range for {axis} must be [min, max, count]")
            lo, hi, count = rng
            if not isinstance(count, int) or count < 1:
                raise ConfigError(f"count for {axis} must be a positive integer")
            # resolve once to catch bad paths early
            _apply(data, axis, float(lo))
            cfg.sweep_axes.append(axis)
            cfg.sweep_ranges.append((float(lo), float(hi), count))
    return cfg


def _apply(data: dict, path: str, value: float) -> dict:
    """Copy of ``data`` with the parameter at dotted ``path`` set to ``value``."""
    out = copy.deepcopy(data)
    if path == DETUNING_AXIS:
        out["systems"][1]["omega"] = out["systems"][0].get("omega", 1.0) + value
        return out
    parts = path.split(".")
    node = out
    try:
        for p in parts[:-1]:
            node = node[int(p)] if isinstance(node, list) else node[p]
        leaf = parts[-1]
        if isinstance(node, list):
            node[int(leaf)] = value
        elif leaf in (_SYSTEM_KEYS | _INTERACTION_KEYS) - {"kind"}:
            node[leaf] = int(round(value)) if leaf == "n_max" else value
        else:
            raise KeyError(leaf)
    except (KeyError, IndexError, ValueError, TypeError) as exc:
        raise ConfigError(f"sweep axis {path!r} does not resolve") from exc
    return out


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)


# --------------------------------------------------------------------------- pipeline


@dataclass
class Analysis:
    space: CompositeSpace
    rho: np.ndarray
    tail: float
    reports: dict
    measures: dict


def analyse(cfg: RunConfig) -> Analysis:
    """Solve the configured pair and evaluate every requested method and measure."""
    space = CompositeSpace(cfg.systems)
    _, _, lv = build_scenario(cfg.systems, cfg.interaction)
    rho = steady_state(lv)
    tail = truncation_check(rho, space, cfg.tail_levels)
    if tail > cfg.tail_threshold:
        raise TruncationError(tail, cfg.tail_threshold)

    reports = {m: harmonic_report(rho, space, m, cfg.grid_points) for m in cfg.methods}
    split = BipartiteSplit(space.dims)
    measures: dict = {
        "S_m": {m: r.sync_measure for m, r in reports.items()},
        "k_d": {m: r.k_d for m, r in reports.items()},
        "S_coh": relative_entropy_of_coherence(rho),
        "mutual_information": mutual_information(rho, split),
        "negativity": negativity(rho, split),
        "truncation_tail": tail,
    }
    if space.dims == (2, 2) and is_x_state(rho):
        i, j, d = x_state_discord(rho)
        measures["discord"] = {"I": i, "J": j, "D": d}
    measures["A_k"] = {
        m: [
            {"k": e.k, "A": e.amplitude, "theta": e.theta, "L": e.magnitude_sum}
            for e in r.entries if e.k >= 1
        ]
        for m, r in reports.items()
    }
    return Analysis(space, rho, tail, reports, measures)


def _round_tree(obj):
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_tree(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _jnum(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_round_tree(obj), indent=2) + "\n", encoding="utf-8")


def write_outputs(cfg: RunConfig, res: Analysis, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "phase_dist" in cfg.outputs:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["phi"] + [f"P_{m}" for m in cfg.methods])
        phi = res.reports[cfg.methods[0]].distribution.phi
        cols = [res.reports[m].distribution.values for m in cfg.methods]
        for j, x in enumerate(phi):
            w.writerow([_num(x)] + [_num(c[j]) for c in cols])
        p = out / "phase_dist.csv"
        p.write_text(buf.getvalue(), encoding="utf-8")
        written.append(p)
    if "subset_report" in cfg.outputs:
        p = out / "subset_report.json"
        _dump_json(p, {"reports": [res.reports[m].to_dict(DIGITS) for m in cfg.methods]})
        written.append(p)
    if "measures" in cfg.outputs:
        p = out / "measures.json"
        _dump_json(p, res.measures)
        written.append(p)
    if "density_matrix" in cfg.outputs:
        pos = inverse_permutation(grouping_permutation(res.space))
        rows, cols = np.nonzero(np.ones_like(res.rho, dtype=bool))
        entries = [
            {
                "row": int(r), "col": int(c),
                "re": res.rho[r, c].real, "im": res.rho[r, c].imag,
                "grouped_row": int(pos[r]), "grouped_col": int(pos[c]),
            }
            for r, c in zip(rows, cols)
        ]
        p = out / "density_matrix.json"
        _dump_json(p, {"dim": res.space.dim, "dims": list(res.space.dims), "entries": entries})
        written.append(p)
    return written


def run_scenario(cfg: RunConfig, out) -> list[Path]:
    return write_outputs(cfg, analyse(cfg), Path(out))


# --------------------------------------------------------------------------- sweeps


def sweep_points(cfg: RunConfig) -> list[tuple[float, ...]]:
    """Grid values in lexicographic order of axis index (last axis fastest)."""
    axes = [np.linspace(lo, hi, n) for lo, hi, n in cfg.sweep_ranges]
    return [tuple(float(v) for v in pt) for pt in itertools.product(*axes)]


def _scalar_columns(cfg: RunConfig) -> list[str]:
    cols = [f"S_m_{m}" for m in cfg.methods] + [f"k_d_{m}" for m in cfg.methods]
    cols += ["S_coh", "mutual_information", "negativity", "truncation_tail"]
    if cfg.systems[0].dim == 2 and cfg.systems[1].dim == 2:
        cols += ["discord_I", "discord_J", "discord_D"]
    return cols


def _scalars(measures: dict, cfg: RunConfig) -> dict:
    row = {f"S_m_{m}": measures["S_m"][m] for m in cfg.methods}
    row.update({f"k_d_{m}": measures["k_d"][m] for m in cfg.methods})
    for key in ("S_coh", "mutual_information", "negativity", "truncation_tail"):
        row[key] = measures[key]
    if "discord" in measures:
        row.update({f"discord_{k}": v for k, v in measures["discord"].items()})
    return row


def _evaluate_point(args) -> tuple[str, str, dict]:
    raw, axes, values = args
    data = raw
    for axis, v in zip(axes, values):
        data = _apply(data, axis, v)
    data = {k: v for k, v in data.items() if k != "sweep"}
    try:
        cfg = parse_config(data)
        res = analyse(cfg)
    except ConfigError as exc:
        return "config_error", str(exc), {}
    except TruncationError as exc:
        return "truncation_error", str(exc), {"truncation_tail": exc.tail}
    except (SolverError, QuadratureError, np.linalg.LinAlgError) as exc:
        return "solver_error", str(exc), {}
    return "ok", "", _scalars(res.measures, cfg)


def resolve_workers(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("QSYNC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer QSYNC_WORKERS=%r", env)
    return os.cpu_count() or 1


def run_sweep(cfg: RunConfig, out, workers: int = 1) -> tuple[Path, int]:
    """Evaluate every grid point and write ``sweep.csv``.

    Failing points are recorded with a status marker and empty measures.
    Returns the CSV path and the exit code of the first failure (0 if none).
    """
    if not cfg.sweep_axes:
        raise ConfigError("config has no sweep section")
    points = sweep_points(cfg)
    tasks = [(cfg.raw, cfg.sweep_axes, pt) for pt in points]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_point, tasks))
    else:
        results = [_evaluate_point(t) for t in tasks]

    cols = _scalar_columns(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(cfg.sweep_axes) + ["status", "message"] + cols)
    code = EXIT_OK
    codes = {"config_error": EXIT_SCHEMA, "solver_error": EXIT_SOLVER, "truncation_error": EXIT_TRUNCATION}
    for pt, (status, msg, vals) in zip(points, results):
        if status != "ok" and code == EXIT_OK:
            code = codes[status]
        cells = []
        for c in cols:
            v = vals.get(c)
            cells.append("" if v is None else (str(v) if isinstance(v, (int, np.integer)) else _num(v)))
        w.writerow([_num(v) for v in pt] + [status, msg] + cells)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    p = out / "sweep.csv"
    p.write_text(buf.getvalue(), encoding="utf-8")
    return p, code


# --------------------------------------------------------------------------- entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsync", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="solve one configuration and write artifacts")
    run.add_argument("config")
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--grid-points", type=int, default=None)
    sw = sub.add_parser("sweep", help="evaluate the configured parameter grid")
    sw.add_argument("config")
    sw.add_argument("--out", required=True)
    sw.add_argument("--workers", type=int, default=None)
    val = sub.add_parser("validate", help="check a config against the schema")
    val.add_argument("config")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"{args.config}: ok")
            return EXIT_OK
        if args.command == "run":
            if args.grid_points is not None:
                if args.grid_points < 3:
                    raise ConfigError("--grid-points must be >= 3")
                cfg.grid_points = args.grid_points
            for p in run_scenario(cfg, args.out):
                log.info("wrote %s", p)
            return EXIT_OK
        path, code = run_sweep(cfg, args.out, resolve_workers(args.workers))
        log.info("wrote %s", path)
        return code
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_SCHEMA
    except TruncationError as exc:
        log.error("truncation: %s", exc)
        return EXIT_TRUNCATION
    except (SolverError, QuadratureError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
