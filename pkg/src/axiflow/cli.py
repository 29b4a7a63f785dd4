"""Command-line entry point.

Subcommands: ``run``, ``monitor``, ``rescale``, ``fit-catenoid``, ``derive``.
Exit codes: 0 success, 1 monitor failure, 2 config error, 3 IO error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .flow import FlowConfig, run
from .monitors import monitor
from .profile import AxisInterval, PinchError, geometric_state, read_profile, write_profile
from .rescale import (
    EmptyWindow,
    FitDiverged,
    NonPositiveArgument,
    catenoid_fit,
    check_rescaled_height_bound,
    contradiction_scale,
    fit_catenoid,
    fit_window,
    height_bound_constant,
    max_curvature_event,
    rescale_trajectory,
)
from .scenarios import DEFAULT_PARAMS, Scenario
from .store import MANIFEST, TrajectoryIOError, load_trajectory, write_trajectory

EXIT_OK, EXIT_MONITOR, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

FLOW_KEYS = {"kind", "t_end", "dt_init", "cfl", "blowup_A2", "snapshot_every"}
GEOMETRY_KEYS = {"scenario", "a", "b", "n_cells"}
PARAM_KEYS = set().union(*DEFAULT_PARAMS.values())

log = logging.getLogger("axiflow")


class ConfigError(ValueError):
    pass


def _load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TrajectoryIOError(str(exc)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def parse_scenario(data: dict) -> Scenario:
    if "scenario" not in data:
        raise ConfigError("missing 'scenario'")
    params = {k: data[k] for k in PARAM_KEYS if k in data}
    try:
        return Scenario(
            str(data["scenario"]),
            AxisInterval(float(data.get("a", 0.0)), float(data.get("b", 1.0))),
            int(data.get("n_cells", 200)),
            params,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_run_config(data: dict) -> tuple[Scenario, FlowConfig, str | None]:
    """Validate a run config; a manifest's ``config`` echo is accepted too."""
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    unknown = set(data) - FLOW_KEYS - GEOMETRY_KEYS - PARAM_KEYS - {"output"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    scenario = parse_scenario(data)
    if not scenario.flowable:
        raise ConfigError(f"scenario {scenario.name} is geometry-only and cannot be flowed")
    for key in ("kind", "t_end"):
        if key not in data:
            raise ConfigError(f"missing {key!r}")
    try:
        flow = FlowConfig(
            kind=data["kind"],
            t_end=float(data["t_end"]),
            dt_init=float(data.get("dt_init", 1e-3)),
            cfl=float(data.get("cfl", 0.25)),
            blowup_A2=None if data.get("blowup_A2") is None else float(data["blowup_A2"]),
            snapshot_every=int(data.get("snapshot_every", 100)),
            n_cells=scenario.n_cells,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return scenario, flow, data.get("output")


def _config_echo(scenario: Scenario, flow: FlowConfig) -> dict:
    echo = {
        "scenario": scenario.name,
        "a": scenario.interval.a,
        "b": scenario.interval.b,
        "n_cells": scenario.n_cells,
        **scenario.params,
    }
    fd = flow.to_dict()
    fd.pop("n_cells")
    echo.update(fd)
    return echo


def _dump(obj, path: Path | None = None) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if path is not None:
        path.write_text(text + "\n", encoding="utf-8")
    print(text)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# ------------------------------------------------------------------ commands


def cmd_run(args: argparse.Namespace) -> int:
    data = _load_json(args.config)
    scenario, flow, output = parse_run_config(data)
    output = args.output or output
    if not output:
        raise ConfigError("no output directory (config 'output' or --output)")
    out = Path(output)
    if (out / MANIFEST).exists() and not args.force:
        raise TrajectoryIOError(f"{out} already holds a trajectory (use --force)")
    initial = scenario.profile()
    try:
        flow.blowup_threshold(initial.interval.length)
        start = time.perf_counter()
        traj = run(initial, flow)
        wall = time.perf_counter() - start
    except (ValueError, PinchError) as exc:
        raise ConfigError(str(exc)) from exc
    if out.exists() and args.force:
        shutil.rmtree(out / "snapshots", ignore_errors=True)
    try:
        write_trajectory(out, traj, {"config": _config_echo(scenario, flow), "wall_time": wall})
    except OSError as exc:
        raise TrajectoryIOError(str(exc)) from exc
    print(json.dumps({"output": str(out), "termination": traj.termination.value, "n_steps": traj.n_steps,
                      "t_final": traj.t_final, "wall_time": wall}))
    return EXIT_OK


def cmd_monitor(args: argparse.Namespace) -> int:
    traj = load_trajectory(args.trajectory)
    report = monitor(traj, rel_tol=args.rel_tol, growth_min=args.growth_min)
    path = Path(args.report) if args.report else Path(args.trajectory) / "report.json"
    try:
        _dump(report.to_json_obj(), path)
    except OSError as exc:
        raise TrajectoryIOError(str(exc)) from exc
    for rec in report.to_json_obj():
        log.info("%-22s %s  worst=%.3e tol=%.3e", rec["name"], "PASS" if rec["passed"] else "FAIL",
                 rec["worst_violation"], rec["tolerance"])
    return EXIT_OK if report.passed else EXIT_MONITOR


def cmd_rescale(args: argparse.Namespace) -> int:
    traj = load_trajectory(args.trajectory)
    try:
        event = max_curvature_event(traj, args.deadline)
    except EmptyWindow as exc:
        raise ConfigError(str(exc)) from exc
    rescaled = rescale_trajectory(traj, event, args.deadline)
    out = Path(args.output) if args.output else Path(args.trajectory) / "rescaled"
    try:
        out.mkdir(parents=True, exist_ok=True)
        for step, rp in zip(traj.snapshot_steps, rescaled):
            write_profile(out / f"rescaled_{step:06d}.json", rp.as_profile(), rp.t, alpha=rp.alpha, tau=rp.tau)
    except OSError as exc:
        raise TrajectoryIOError(str(exc)) from exc

    at_event = next(rp for rp in rescaled if rp.tau == 0.0)
    report: dict = {
        "event": {"alpha": event.alpha, "t_i": event.t_i, "node_index": event.node_index, "x1_i": event.x1_i},
        "window_half_width": args.window,
        "max_A_tilde": max(float(rp.A_tilde.max()) for rp in rescaled),
    }
    mon = monitor(traj)
    c5_bound = height_bound_constant(mon.constants["c0"])
    verdict = check_rescaled_height_bound(at_event, c5_bound)
    report["height_bound"] = {"c5": c5_bound, "max_product": verdict.max_product, "passed": verdict.passed}
    try:
        fit = catenoid_fit(at_event, args.window)
        scale = float(np.mean(at_event.rho_tilde))
        report["catenoid_fit"] = {
            "c5": fit.c5, "x0": fit.x0, "rms_residual": fit.rms_residual, "n_points": fit.n_points,
            "quality": "good" if fit.rms_residual <= args.fit_tol * scale else "poor",
        }
        try:
            report["contradiction_scale"] = contradiction_scale(
                fit, mon.constants["c4"], event.alpha, args.eps1, args.eps2)
        except NonPositiveArgument as exc:
            report["contradiction_scale"] = None
            report["contradiction_note"] = f"NonPositiveArgument: {exc}"
    except (FitDiverged, ValueError) as exc:
        report["catenoid_fit"] = {"error": f"{type(exc).__name__}: {exc}", "quality": "poor"}
    try:
        _dump(report, out / "fit_report.json")
    except OSError as exc:
        raise TrajectoryIOError(str(exc)) from exc
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    try:
        _, prof = read_profile(args.profile)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        fit = fit_catenoid(*fit_window(prof.x, prof.rho, args.window))
    except FitDiverged as exc:
        _dump({"error": f"FitDiverged: {exc}"})
        return EXIT_MONITOR
    _dump({"c5": fit.c5, "x0": fit.x0, "rms_residual": fit.rms_residual, "n_points": fit.n_points})
    return EXIT_OK


def cmd_derive(args: argparse.Namespace) -> int:
    if args.profile:
        try:
            t, prof = read_profile(args.profile)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        data = _load_json(args.config)
        prof = parse_scenario(data).profile()
        t = 0.0
    try:
        st = geometric_state(prof)
    except PinchError as exc:
        raise ConfigError(str(exc)) from exc
    out = {
        "t": t,
        "surface_area": st.surface_area,
        "enclosed_volume": st.enclosed_volume,
        "x": prof.x,
        **{name: getattr(st, name) for name in ("y", "v", "p", "k", "q", "H", "A2")},
    }
    _dump(out, Path(args.output) if args.output else None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axiflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario and write a trajectory directory")
    p.add_argument("config", help="JSON config (or a manifest.json to reproduce a run)")
    p.add_argument("-o", "--output", help="output directory (overrides config 'output')")
    p.add_argument("--force", action="store_true", help="overwrite an existing trajectory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("monitor", help="audit a trajectory; exit 1 if any check fails")
    p.add_argument("trajectory")
    p.add_argument("--report", help="report path (default: <trajectory>/report.json)")
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--growth-min", type=float, default=10.0)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("rescale", help="blow-up rescaling and catenoid fit")
    p.add_argument("trajectory")
    p.add_argument("--deadline", type=float, default=None, help="default: last snapshot time")
    p.add_argument("-o", "--output", help="default: <trajectory>/rescaled")
    p.add_argument("--window", type=float, default=3.0, help="fit half-width in rescaled units")
    p.add_argument("--fit-tol", type=float, default=1e-2, help="relative rms for a 'good' fit")
    p.add_argument("--eps1", type=float, default=1e-3)
    p.add_argument("--eps2", type=float, default=1e-3)
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("fit-catenoid", help="fit c cosh((x - x0)/c) to a profile JSON")
    p.add_argument("profile")
    p.add_argument("--window", type=float, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("derive", help="dump the geometric state of a scenario or profile")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config")
    g.add_argument("--profile")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_derive)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrajectoryIOError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
