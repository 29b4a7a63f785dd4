"""On-disk layout of a trajectory directory.

    manifest.json          config echo, flow kind, termination, timing
    steps.csv              one row per logged step (17 significant digits)
    snapshots/snap_NNNNNN.json   profile snapshots, zero-padded step index
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .flow import STEP_LOG_FIELDS, FlowConfig, FlowKind, FlowTrajectory, StepRecord, Termination
from .profile import read_profile, write_profile

MANIFEST = "manifest.json"
STEPS = "steps.csv"
SNAPSHOT_DIR = "snapshots"


class TrajectoryIOError(OSError):
    pass


def snapshot_name(step: int) -> str:
    return f"snap_{step:06d}.json"


def write_step_log(path: Path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(STEP_LOG_FIELDS)
        for rec in records:
            writer.writerow(["%.17g" % v for v in rec])


def read_step_log(path: Path) -> list[StepRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != STEP_LOG_FIELDS:
            raise TrajectoryIOError(f"{path}: unexpected header {header}")
        return [StepRecord(*(float(v) for v in row)) for row in reader if row]


def write_trajectory(directory: str | Path, traj: FlowTrajectory, manifest_extra: dict | None = None) -> Path:
    out = Path(directory)
    snap_dir = out / SNAPSHOT_DIR
    snap_dir.mkdir(parents=True, exist_ok=True)
    write_step_log(out / STEPS, traj.step_log)
    names = []
    for step, (t, prof) in zip(traj.snapshot_steps, traj.snapshots):
        name = snapshot_name(step)
        write_profile(snap_dir / name, prof, t)
        names.append(name)
    manifest = {
        "kind": traj.kind.value,
        "termination": traj.termination.value,
        "n_steps": traj.n_steps,
        "t_final": traj.t_final,
        "snapshots": names,
        "flow_config": traj.config.to_dict() if traj.config else None,
    }
    manifest.update(manifest_extra or {})
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return out


def load_trajectory(directory: str | Path) -> FlowTrajectory:
    """Rebuild a trajectory written by :func:`write_trajectory`.

    Raises:
        TrajectoryIOError: on missing or corrupt files.
    """
    d = Path(directory)
    try:
        manifest = json.loads((d / MANIFEST).read_text(encoding="utf-8"))
        log = read_step_log(d / STEPS)
        names = manifest["snapshots"]
        if not names or not log:
            raise TrajectoryIOError(f"{d}: no snapshots or empty step log")
        snapshots = [read_profile(d / SNAPSHOT_DIR / name) for name in names]
        steps = [int(Path(n).stem.split("_")[-1]) for n in names]
        cfg = manifest.get("flow_config")
        return FlowTrajectory(
            kind=FlowKind.parse(manifest["kind"]),
            snapshots=snapshots,
            step_log=log,
            termination=Termination(manifest["termination"]),
            config=FlowConfig(**cfg) if cfg else None,
            n_steps=int(manifest.get("n_steps", len(log) - 1)),
            snapshot_steps=steps,
        )
    except TrajectoryIOError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise TrajectoryIOError(f"cannot load trajectory from {d}: {exc}") from exc
