"""Command-line entry point: synthesize, reconstruct, presets, oracles and sweeps.

Configuration files are INI-style with the sections ``scatterer``, ``ball``,
``wave``, ``solver`` and ``noise``; every key is optional and falls back to
the apple preset. Command-line flags override the file. Angles accept plain
numbers or simple expressions in ``pi`` such as ``-pi/6``.

Exit codes: 0 success or convergence, 2 bad input, 3 solver failure,
4 iteration budget exhausted.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import hashlib
import json
import logging
import operator
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from refball import __version__
from refball.checks import run_suite
from refball.errors import ConditioningError, GeometryError
from refball.forward import PhaselessSamples, add_noise, synthesize_farfield
from refball.inversion import (
    BUDGET,
    CONVERGED,
    PRESETS,
    SolverConfig,
    reconstruct,
)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3
EXIT_BUDGET = 4

SWEEP_BALLS = [((4.0, 0.0), 0.4), ((4.0, 0.0), 0.8), ((6.0, 0.0), 0.4), ((6.0, 0.0), 0.8)]
SWEEP_DIRECTIONS = [-np.pi / 6, 4 * np.pi / 3]

logger = logging.getLogger("refball")


class InputError(Exception):
    """Bad configuration or data; maps to exit code 2."""


# ---------------------------------------------------------------- parsing

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Evaluate a number or arithmetic expression in ``pi``, e.g. ``4*pi/3``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return np.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError

    try:
        return float(ev(ast.parse(text.strip(), mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise InputError(f"cannot read {text!r} as a number") from None


def parse_pair(text: str) -> tuple:
    parts = [p for p in text.replace("(", "").replace(")", "").split(",") if p.strip()]
    if len(parts) != 2:
        raise InputError(f"expected two comma-separated values, got {text!r}")
    return tuple(parse_number(p) for p in parts)


def parse_switch(text: str) -> bool:
    value = text.strip().lower()
    if value in ("on", "yes", "true", "1"):
        return True
    if value in ("off", "no", "false", "0"):
        return False
    raise InputError(f"expected on/off, got {text!r}")


# (section, key) -> (SolverConfig field, converter)
CONFIG_KEYS = {
    ("scatterer", "shape"): ("shape", str.strip),
    ("scatterer", "center"): ("shape_center", parse_pair),
    ("scatterer", "radius"): ("shape_radius", parse_number),
    ("ball", "center"): ("ball_center", parse_pair),
    ("ball", "radius"): ("ball_radius", parse_number),
    ("wave", "wavenumber"): ("wavenumber", parse_number),
    ("wave", "direction"): ("direction_angle", parse_number),
    ("solver", "n"): ("n", int),
    ("solver", "m"): ("M", int),
    ("solver", "rho"): ("rho", parse_number),
    ("solver", "epsilon"): ("epsilon", parse_number),
    ("solver", "max_iterations"): ("max_iterations", int),
    ("solver", "init_center"): ("init_center", parse_pair),
    ("solver", "init_radius"): ("init_radius", parse_number),
    ("solver", "freeze_modes"): ("freeze_modes", parse_switch),
    ("noise", "level"): ("noise", parse_number),
    ("noise", "seed"): ("seed", int),
    ("noise", "distribution"): ("noise_distribution", str.strip),
}


def read_config(path, base: SolverConfig | None = None) -> SolverConfig:
    """Read an INI file into a :class:`SolverConfig`, starting from ``base``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    changes = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if (section, key) not in CONFIG_KEYS:
                raise InputError(f"unknown config key [{section}] {key}")
            name, convert = CONFIG_KEYS[(section, key)]
            try:
                changes[name] = convert(raw)
            except ValueError:
                raise InputError(f"bad value for [{section}] {key}: {raw!r}") from None
    return build_config(base or PRESETS["apple"], changes)


def build_config(base: SolverConfig, changes: dict) -> SolverConfig:
    try:
        return base.replace(**changes)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration: {exc}") from None


def flag_overrides(args) -> dict:
    out = {}
    for flag, name, convert in [
        ("noise", "noise", float), ("seed", "seed", int),
        ("ball_center", "ball_center", parse_pair), ("ball_radius", "ball_radius", float),
        ("init_center", "init_center", parse_pair), ("init_radius", "init_radius", float),
        ("epsilon", "epsilon", float), ("max_iter", "max_iterations", int),
        ("freeze_modes", "freeze_modes", parse_switch),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            out[name] = convert(value)
    return out


# ---------------------------------------------------------------- output

def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def write_farfield(path: Path, angles, values, intensities):
    """Rows ``(t, Re u, Im u, |u|^2)``; the last column holds the (possibly noisy) data."""
    write_csv(path, ["t", "re", "im", "intensity"],
              zip(angles, np.real(values), np.imag(values), intensities))


def read_farfield(path, config: SolverConfig) -> PhaselessSamples:
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read data {path}: {exc}") from None
    grid = config.grid
    if table.shape[0] != grid.size or table.shape[1] < 4:
        raise InputError(f"data has {table.shape[0]} rows; the configured grid n={config.n} "
                         f"needs {grid.size}")
    if not np.allclose(table[:, 0], grid.knots, atol=1e-12):
        raise InputError("data angles do not match the configured grid")
    try:
        return PhaselessSamples(grid.knots, table[:, 3])
    except ValueError as exc:
        raise InputError(str(exc)) from None


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, config: SolverConfig, command: str, timings: dict,
                   termination: dict, extra: dict | None = None):
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    manifest = {
        "command": command,
        "config": config.to_dict(),
        "seed": config.seed,
        "versions": {"refball": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "timings": timings,
        "termination": termination,
        "files": {str(p.relative_to(out)): sha256(p) for p in files},
    }
    if extra:
        manifest.update(extra)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj))


def write_run(out: Path, config: SolverConfig, history):
    """Curve snapshots, error table and per-iteration solver log."""
    grid = config.grid
    t = grid.knots
    curves = out / "curves"
    curves.mkdir(parents=True, exist_ok=True)
    snapshots = {}
    for rec in history.records:
        pts = rec.curve.point(t)
        write_csv(curves / f"curve_{rec.k:03d}.csv", ["tau", "x", "y"], zip(t, pts[:, 0], pts[:, 1]))
        snapshots[rec.k] = {"center": rec.curve.center.tolist(),
                            "coeffs": rec.curve.coeffs.tolist(), "M": rec.curve.M}
    with open(curves / "coefficients.json", "w") as fh:
        json.dump(snapshots, fh, indent=2)
        fh.write("\n")
    write_csv(out / "errors.csv", ["k", "E", "Er", "lambda"],
              [(r.k, r.E, r.Er, r.lam) for r in history.records])
    M = config.M
    step_names = ["dc1", "dc2"] + [f"a{m}" for m in range(M + 1)] + [f"b{m}" for m in range(1, M + 1)]
    rows = []
    for r in history.records:
        step = r.step if r.step is not None else np.zeros(2 * M + 3)
        rows.append([r.k, r.lam, r.condition, *step])
    write_csv(out / "iterations.csv", ["k", "lambda", "condition", *step_names], rows)


# ---------------------------------------------------------------- commands

def _synthesize(config: SolverConfig, with_ball=True):
    ball = config.ball if with_ball else None
    clean = synthesize_farfield(config.exact_curve(), ball, config.wave, config.n)
    noisy = add_noise(clean.phaseless(), config.noise, config.seed, config.noise_distribution)
    return clean, noisy


def _reconstruct(config: SolverConfig, data: PhaselessSamples):
    return reconstruct(config, data, exact=config.exact_curve())


def _termination(history) -> dict:
    return {"reason": history.reason, "message": history.message,
            "iterations": history.iterations, "final_E": history.final.E,
            "final_Er": history.final.Er}


def _exit_for(history) -> int:
    if history.reason == CONVERGED:
        return EXIT_OK
    if history.reason == BUDGET:
        return EXIT_BUDGET
    return EXIT_SOLVER


def cmd_synthesize(args) -> int:
    config = build_config(read_config(args.config), flag_overrides(args))
    with_ball = not args.no_ball
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    clean, noisy = _synthesize(config, with_ball)
    elapsed = time.perf_counter() - start
    write_farfield(out / "farfield.csv", clean.angles, clean.values, noisy.intensities)
    write_manifest(out, config, "synthesize", {"synthesis": elapsed},
                   {"reason": "ok"}, {"reference_ball": with_ball})
    print(f"wrote {len(clean.angles)} far-field samples to {out / 'farfield.csv'}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    config = build_config(read_config(args.config), flag_overrides(args))
    data = read_farfield(args.data, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    history = _reconstruct(config, data)
    elapsed = time.perf_counter() - start
    write_run(out, config, history)
    write_manifest(out, config, "reconstruct", {"reconstruction": elapsed},
                   _termination(history), {"data": str(args.data)})
    _report(history, elapsed)
    return _exit_for(history)


def cmd_run_preset(args) -> int:
    if args.name not in PRESETS:
        raise InputError(f"unknown preset {args.name!r}; choose from {sorted(PRESETS)}")
    config = build_config(PRESETS[args.name], flag_overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    clean, noisy = _synthesize(config)
    t1 = time.perf_counter()
    history = _reconstruct(config, noisy)
    t2 = time.perf_counter()
    write_farfield(out / "farfield.csv", clean.angles, clean.values, noisy.intensities)
    write_run(out, config, history)
    write_manifest(out, config, f"run-preset {args.name}",
                   {"synthesis": t1 - t0, "reconstruction": t2 - t1},
                   _termination(history), {"preset": args.name})
    _report(history, t2 - t1)
    return _exit_for(history)


def cmd_oracle(args) -> int:
    try:
        results = run_suite(args.suite)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else 1


def sweep_jobs(config: SolverConfig):
    """The ball/direction grid with one deterministic noise seed per cell."""
    jobs = []
    for (center, radius) in SWEEP_BALLS:
        for angle in SWEEP_DIRECTIONS:
            jobs.append(config.replace(ball_center=center, ball_radius=radius,
                                       direction_angle=angle, seed=config.seed + len(jobs)))
    return jobs


def _sweep_cell(config: SolverConfig):
    start = time.perf_counter()
    try:
        _, data = _synthesize(config)
        history = _reconstruct(config, data)
    except (ConditioningError, GeometryError) as exc:
        return {"reason": "synthesis_failed", "message": str(exc), "iterations": 0,
                "E": float("nan"), "Er": float("nan"), "seconds": time.perf_counter() - start}
    return {"reason": history.reason, "message": history.message, "iterations": history.iterations,
            "E": history.final.E, "Er": history.final.Er, "seconds": time.perf_counter() - start}


def worker_count(jobs: int) -> int:
    cap = os.environ.get("PHASELESS_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise InputError(f"PHASELESS_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(limit, jobs))


def run_sweep(config: SolverConfig, workers: int | None = None):
    jobs = sweep_jobs(config)
    workers = worker_count(len(jobs)) if workers is None else workers
    if workers == 1:
        results = [_sweep_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    return jobs, results


def cmd_sweep(args) -> int:
    if args.preset not in PRESETS:
        raise InputError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
    config = build_config(PRESETS[args.preset], flag_overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    jobs, results = run_sweep(config)
    elapsed = time.perf_counter() - start
    rows = []
    for job, res in zip(jobs, results):
        rows.append([*job.ball_center, job.ball_radius, job.direction_angle, job.seed,
                     res["reason"], res["iterations"], res["E"], res["Er"], res["seconds"]])
    write_csv(out / "sweep.csv", ["b1", "b2", "R", "direction", "seed", "reason",
                                  "iterations", "E", "Er", "seconds"], rows)
    converged = sum(r["reason"] == CONVERGED for r in results)
    write_manifest(out, config, f"sweep {args.preset}", {"sweep": elapsed},
                   {"reason": "ok", "converged": converged, "cells": len(results)})
    for row in rows:
        print(f"ball=({row[0]:g},{row[1]:g}) R={row[2]:g} d={row[3]:+.4f}  "
              f"{row[5]:<15s} k={row[6]:<3d} E={row[7]:.4f} Er={row[8]:.4f}")
    print(f"{converged}/{len(results)} cells converged in {elapsed:.1f} s")
    return EXIT_OK


def _report(history, seconds):
    rec = history.final
    print(f"{history.reason}: k={rec.k} E={rec.E:.5f} Er={rec.Er:.5f} ({seconds:.2f} s)")
    if history.message:
        print(history.message)


# ---------------------------------------------------------------- main

def _add_overrides(p):
    p.add_argument("--noise", help="relative noise level delta")
    p.add_argument("--seed", help="noise seed")
    p.add_argument("--ball-center", help="reference ball center, e.g. 4,0")
    p.add_argument("--ball-radius", help="reference ball radius")
    p.add_argument("--init-center", help="center of the initial circle")
    p.add_argument("--init-radius", help="radius of the initial circle")
    p.add_argument("--epsilon", help="stopping tolerance on E_k")
    p.add_argument("--max-iter", help="iteration budget")
    p.add_argument("--freeze-modes", choices=["on", "off"], help="pin the first radial modes")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refball", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="write far-field data for a configured scene")
    p.add_argument("config")
    p.add_argument("--no-ball", action="store_true", help="omit the reference ball")
    _add_overrides(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("reconstruct", help="reconstruct from a far-field CSV")
    p.add_argument("config")
    p.add_argument("data")
    _add_overrides(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("run-preset", help="synthesize and reconstruct a named example")
    p.add_argument("name", help="apple, peanut or rectangle")
    _add_overrides(p)
    p.set_defaults(func=cmd_run_preset)

    p = sub.add_parser("oracle", help="run numerical self-checks")
    p.add_argument("suite", help="mie, weights, gradient or all")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="ball placement and direction robustness sweep")
    p.add_argument("--preset", default="apple")
    _add_overrides(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ConditioningError, GeometryError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
