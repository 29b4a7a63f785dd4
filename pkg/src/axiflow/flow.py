"""Explicit time integration of the two curvature flows in graph form.

With ``v = sqrt(1 + rho'^2)`` and normal speed ``S`` (``H`` for mean
curvature flow, ``H - h`` for the volume-preserving flow) the radius at
fixed axial position moves with ``rho_t = -S v``.  Expanded:

    MCF:     rho_t = rho'' / (1 + rho'^2) - 1 / rho
    volume:  rho_t = rho'' / (1 + rho'^2) - 1 / rho + h sqrt(1 + rho'^2)

Time stepping is forward Euler with ``dt <= cfl * min(dx^2, min(rho)^2)``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .profile import (
    PINCH_FRACTION,
    FloatArray,
    GeometricState,
    RadiusProfile,
    _state_from_arrays,
    geometric_state,
    trapezoid_weights,
)

logger = logging.getLogger(__name__)

DT_UNDERFLOW_FRACTION = 1e-14
BLOWUP_SCALE = 1e8


class FlowKind(str, enum.Enum):
    MeanCurvature = "mcf"
    VolumePreserving = "volume"

    @classmethod
    def parse(cls, value: "FlowKind | str") -> "FlowKind":
        if isinstance(value, FlowKind):
            return value
        key = str(value).strip().lower()
        aliases = {
            "mcf": cls.MeanCurvature,
            "meancurvature": cls.MeanCurvature,
            "mean_curvature": cls.MeanCurvature,
            "volume": cls.VolumePreserving,
            "vpmcf": cls.VolumePreserving,
            "volumepreserving": cls.VolumePreserving,
            "volume_preserving": cls.VolumePreserving,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown flow kind {value!r}") from None


class Termination(str, enum.Enum):
    ReachedTEnd = "ReachedTEnd"
    BlowupDetected = "BlowupDetected"
    PinchDetected = "PinchDetected"
    DtUnderflow = "DtUnderflow"


class StepRejected(RuntimeError):
    """An Euler update produced a non-positive radius."""


@dataclass(frozen=True)
class FlowConfig:
    """Run parameters.

    ``dt_init`` is the first (and largest) step tried; the stability bound
    may shrink it.  ``blowup_A2`` defaults to ``1e8 / (b - a)^2`` when left
    as None.
    """

    kind: FlowKind
    t_end: float
    dt_init: float = 1e-3
    cfl: float = 0.25
    blowup_A2: float | None = None
    snapshot_every: int = 100
    n_cells: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FlowKind.parse(self.kind))
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.dt_init > 0:
            raise ValueError("dt_init must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.blowup_A2 is not None and not self.blowup_A2 > 0:
            raise ValueError("blowup_A2 must be positive")

    def blowup_threshold(self, length: float) -> float:
        if self.blowup_A2 is not None:
            return float(self.blowup_A2)
        return BLOWUP_SCALE / (length * length)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


class StepRecord(NamedTuple):
    t: float
    dt: float
    h: float
    maxA: float
    maxH: float
    minRho: float
    maxVY: float
    maxKoverP: float
    volume: float


STEP_LOG_FIELDS = StepRecord._fields


@dataclass
class FlowTrajectory:
    kind: FlowKind
    snapshots: list[tuple[float, RadiusProfile]]
    step_log: list[StepRecord]
    termination: Termination
    config: FlowConfig | None = None
    n_steps: int = 0
    snapshot_steps: list[int] = field(default_factory=list)

    def column(self, name: str) -> FloatArray:
        idx = STEP_LOG_FIELDS.index(name)
        return np.array([rec[idx] for rec in self.step_log], dtype=np.float64)

    @property
    def initial(self) -> tuple[float, RadiusProfile]:
        return self.snapshots[0]

    @property
    def final(self) -> tuple[float, RadiusProfile]:
        return self.snapshots[-1]

    @property
    def t_final(self) -> float:
        return self.step_log[-1].t


def average_mean_curvature(state: GeometricState) -> float:
    """Area-weighted mean of H, trapezoid rule on both integrals."""
    # the 2 pi of the area element cancels
    da = trapezoid_weights(state.y.size - 1, state.dx) * state.vy
    return float((da * state.H).sum() / da.sum())


def _speed(state: GeometricState, kind: FlowKind, h: float | None = None) -> FloatArray:
    g = state.v * state.v
    speed = state.rho2 / g - 1.0 / state.y
    if kind is FlowKind.VolumePreserving:
        if h is None:
            h = average_mean_curvature(state)
        speed = speed + h * state.v
    return speed


def rhs(profile: RadiusProfile, kind: FlowKind | str) -> FloatArray:
    """Radial velocity ``rho_t`` at every node."""
    return _speed(geometric_state(profile), FlowKind.parse(kind))


def step(profile: RadiusProfile, kind: FlowKind | str, dt: float) -> RadiusProfile:
    """One forward-Euler step; h (volume flow) frozen at the pre-step state.

    Raises:
        StepRejected: if the update leaves any radius non-positive.
    """
    new = profile.rho + dt * rhs(profile, kind)
    if np.any(new <= 0.0):
        raise StepRejected(f"dt={dt:.3e} drives min rho to {new.min():.3e}")
    return profile.with_rho(new)


def stable_dt(dx: float, min_rho: float, cfl: float) -> float:
    # diffusion coefficient 1/(1+rho'^2) <= 1; the -1/rho term needs dt << rho^2
    return cfl * min(dx * dx, min_rho * min_rho)


def _record(t: float, dt: float, state: GeometricState) -> StepRecord:
    return StepRecord(
        t=t,
        dt=dt,
        h=average_mean_curvature(state),
        maxA=math.sqrt(state.A2.max()),
        maxH=float(max(state.H.max(), -state.H.min())),
        minRho=float(state.y.min()),
        maxVY=float(state.vy.max()),
        maxKoverP=float(state.k_over_p.max()),
        volume=state.enclosed_volume,
    )


def run(initial: RadiusProfile, config: FlowConfig) -> FlowTrajectory:
    """Integrate until t_end or a terminating event.

    Every accepted step is logged; snapshots are kept at t = 0, every
    ``snapshot_every`` steps and at the final state.
    """
    kind = config.kind
    if config.n_cells is not None and config.n_cells != initial.n_cells:
        raise ValueError(f"config n_cells={config.n_cells} but profile has {initial.n_cells}")
    dx = initial.dx
    blowup = config.blowup_threshold(initial.interval.length)
    state = geometric_state(initial)
    if not blowup > float(state.A2.max()):
        raise ValueError(f"blowup_A2={blowup:.3e} does not exceed initial max |A|^2={state.A2.max():.3e}")

    t = 0.0
    rho = initial.rho
    # Kahan compensation: rounding of rho + dt*speed must not pile up over
    # many tiny steps (snapshot differences are divided by small spans)
    carry = np.zeros_like(rho)
    log = [_record(t, 0.0, state)]
    snapshots = [(t, initial)]
    snapshot_steps = [0]
    termination = Termination.ReachedTEnd
    n = 0
    dt_floor = DT_UNDERFLOW_FRACTION * config.dt_init
    pinch_radius = PINCH_FRACTION * initial.interval.length
    max_a = math.sqrt(blowup)

    while True:
        remaining = config.t_end - t
        if remaining <= 0.0:
            break
        dt = min(config.dt_init, stable_dt(dx, log[-1].minRho, config.cfl))
        if dt < dt_floor:
            termination = Termination.DtUnderflow
            break
        # absorb a remainder left by summation rounding into this step
        last = dt >= remaining - 1e-12 * config.t_end
        if last:
            dt = remaining
        speed = _speed(state, kind, log[-1].h)
        while True:
            inc = dt * speed - carry
            new = rho + inc
            if new.min() > 0.0:
                break
            dt *= 0.5
            last = False
            if dt < dt_floor:
                new = None
                break
        if new is None:
            termination = Termination.PinchDetected
            break
        carry = (new - rho) - inc
        rho = new
        t = config.t_end if last else t + dt
        n += 1
        state = _state_from_arrays(rho, dx)
        rec = _record(t, dt, state)
        log.append(rec)
        if rec.minRho <= pinch_radius:
            termination = Termination.PinchDetected
            break
        if rec.maxA >= max_a:
            termination = Termination.BlowupDetected
            break
        if n % config.snapshot_every == 0:
            snapshots.append((t, initial.with_rho(rho)))
            snapshot_steps.append(n)

    if snapshot_steps[-1] != n:
        snapshots.append((t, initial.with_rho(rho)))
        snapshot_steps.append(n)
    logger.info("run finished: %s after %d steps at t=%.6g", termination.value, n, t)
    return FlowTrajectory(
        kind=kind,
        snapshots=snapshots,
        step_log=log,
        termination=termination,
        config=config,
        n_steps=n,
        snapshot_steps=snapshot_steps,
    )


def extrapolated_singular_time(times: FloatArray, min_rho: FloatArray) -> float:
    """Zero of a least-squares line through ``min_rho^2`` against time."""
    slope, intercept = np.polyfit(np.asarray(times), np.asarray(min_rho) ** 2, 1)
    if slope >= 0:
        return math.inf
    return float(-intercept / slope)
