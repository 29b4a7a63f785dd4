"""Maximum-principle audits and evolution-equation residuals along a run.

Every check is a pure function of a :class:`~axiflow.flow.FlowTrajectory`
and returns a :class:`CheckRecord` with ``passed == (worst_violation <=
tolerance)``.  ``worst_violation`` is the largest excess of the monitored
quantity over its bound (negative values are margins).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .flow import FlowKind, FlowTrajectory, Termination, average_mean_curvature
from .profile import FloatArray, _laplacian, central_derivatives, geometric_state

DEFAULT_REL_TOL = 1e-6
QUANTITIES = ("y", "v", "k", "p", "H")
# strictly-positive requirement expressed as "violation <= tolerance"
_STRICT = -math.ulp(0.0)


class WrongKind(ValueError):
    """Check applied to a trajectory of the other flow kind."""


class HNotBounded(ValueError):
    """Logged max |H| exceeds the bound supplied by the caller."""


class InsufficientSnapshots(ValueError):
    pass


@dataclass
class CheckRecord:
    name: str
    worst_violation: float
    at_time: float
    passed: bool
    tolerance: float
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _record(name: str, excess: FloatArray, times: FloatArray, tol: float, **detail) -> CheckRecord:
    i = int(np.argmax(excess))
    worst = float(excess[i])
    return CheckRecord(name, worst, float(times[i]), bool(worst <= tol), float(tol), detail)


def _initial_state(traj: FlowTrajectory):
    return geometric_state(traj.snapshots[0][1])


def h_constants(traj: FlowTrajectory) -> tuple[float, float]:
    h = traj.column("h")
    return float(h.min()), float(h.max())


def vy_constant(traj: FlowTrajectory, c3: float | None = None) -> float:
    """The time-independent bound on vy built from the initial surface.

    Mean curvature flow: ``max_0 vy``.  Volume flow: ``max_0 vy + c3 T``
    with ``T`` the final logged time.
    """
    vy0 = float(_initial_state(traj).vy.max())
    if traj.kind is FlowKind.MeanCurvature:
        return vy0
    if c3 is None:
        c3 = h_constants(traj)[1]
    return vy0 + c3 * traj.t_final


def k_over_p_constant(traj: FlowTrajectory) -> float:
    return max(1.0, float(_initial_state(traj).k_over_p.max()))


def check_h_bounds(traj: FlowTrajectory) -> CheckRecord:
    """Positivity of the average mean curvature along a volume-flow run."""
    if traj.kind is not FlowKind.VolumePreserving:
        raise WrongKind("h bounds apply to volume-preserving runs only")
    h = traj.column("h")
    t = traj.column("t")
    c2, c3 = float(h.min()), float(h.max())
    return _record("h_bounds", -h, t, _STRICT, c2=c2, c3=c3)


def check_vy(traj: FlowTrajectory, c3: float | None = None, rel_tol: float = DEFAULT_REL_TOL) -> CheckRecord:
    t = traj.column("t")
    vy = traj.column("maxVY")
    vy0 = float(_initial_state(traj).vy.max())
    bound = np.full_like(t, vy0)
    detail = {"max0_vy": vy0}
    if traj.kind is FlowKind.VolumePreserving:
        if c3 is None:
            c3 = h_constants(traj)[1]
        bound = bound + c3 * t
        detail["c3"] = c3
    detail["c4"] = vy_constant(traj, c3)
    return _record("vy_bound", vy - bound, t, rel_tol * vy0, **detail)


def check_k_over_p(traj: FlowTrajectory, rel_tol: float = DEFAULT_REL_TOL) -> CheckRecord:
    t = traj.column("t")
    c1 = k_over_p_constant(traj)
    return _record("k_over_p", traj.column("maxKoverP") - c1, t, rel_tol * c1, c1=c1)


def check_abs_k_over_p(
    traj: FlowTrajectory, C: float, c4: float | None = None, rel_tol: float = DEFAULT_REL_TOL
) -> CheckRecord:
    """``|k|/p <= 1 + C c4`` under the bound ``|H| <= C``.

    The log only carries signed ``max k/p``, so ``|k|/p`` is audited on the
    stored snapshots.

    Raises:
        HNotBounded: if the logged ``max |H|`` exceeds ``C`` anywhere.
    """
    max_h = float(traj.column("maxH").max())
    if max_h > C:
        raise HNotBounded(f"logged max|H| = {max_h:.6g} exceeds C = {C:.6g}")
    if c4 is None:
        c4 = vy_constant(traj)
    c0 = 1.0 + C * c4
    times = np.array([s[0] for s in traj.snapshots])
    ratio = np.array([float(np.max(np.abs(st.k) / st.p)) for st in (geometric_state(p) for _, p in traj.snapshots)])
    return _record("abs_k_over_p", ratio - c0, times, rel_tol * c0, C=C, c4=c4, c0=c0)


# ------------------------------------------------------------- residuals


@dataclass
class ResidualTable:
    """Max-node ``|LHS - RHS|`` per quantity at each interior snapshot."""

    kind: FlowKind
    times: FloatArray
    residuals: dict[str, FloatArray]

    def max(self, quantity: str) -> float:
        return float(np.max(self.residuals[quantity]))

    def as_dict(self) -> dict[str, float]:
        return {q: self.max(q) for q in self.residuals}


def _fields(state, h: float) -> dict[str, FloatArray]:
    return {"y": state.y, "v": state.v, "k": state.k, "p": state.p, "H": state.H}


def _rhs(quantity: str, state, h: float) -> FloatArray:
    rho, dx = state.y, state.dx
    A2, k, p, q2 = state.A2, state.k, state.p, state.q * state.q
    lap = lambda f: _laplacian(rho, f, dx)  # noqa: E731
    if quantity == "y":
        return lap(state.y) - 1.0 / state.y + h * p * state.y
    if quantity == "v":
        v = state.v
        dv = central_derivatives(v, dx)[0]
        grad2 = dv * dv / (v * v)
        return lap(v) - A2 * v + v / (state.y * state.y) - 2.0 / v * grad2
    if quantity == "k":
        return lap(k) + A2 * k - 2.0 * q2 * (k - p) - h * k * k
    if quantity == "p":
        return lap(p) + A2 * p + 2.0 * q2 * (k - p) - h * p * p
    if quantity == "H":
        return lap(state.H) + (state.H - h) * A2
    raise ValueError(f"unknown quantity {quantity!r}")


def evolution_residuals(
    traj: FlowTrajectory, which: Iterable[str] = QUANTITIES, indices: Iterable[int] | None = None
) -> ResidualTable:
    """Compare snapshot time derivatives with the evolution equations.

    The time derivative is taken at a fixed surface point, not at fixed
    axial position: nodes of the graph drift tangentially by
    ``dx/dt = -rho_t rho' / (1 + rho'^2)`` relative to the normal motion, so
    ``df/dt|_l = (f^{n+1} - f^{n-1}) / (t^{n+1} - t^{n-1}) + drift f'``.
    The ``h`` terms are dropped for mean curvature flow.
    """
    which = tuple(which)
    for q in which:
        if q not in QUANTITIES:
            raise ValueError(f"unknown quantity {q!r}")
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise InsufficientSnapshots(f"need >= 3 snapshots, have {len(snaps)}")
    if indices is None:
        indices = range(1, len(snaps) - 1)
    indices = list(indices)
    if any(i < 1 or i > len(snaps) - 2 for i in indices):
        raise InsufficientSnapshots("residuals need a snapshot on each side")

    volume = traj.kind is FlowKind.VolumePreserving
    out: dict[str, list[float]] = {q: [] for q in which}
    times = []
    for i in indices:
        (t0, p0), (t1, p1), (t2, p2) = snaps[i - 1], snaps[i], snaps[i + 1]
        s0, s1, s2 = geometric_state(p0), geometric_state(p1), geometric_state(p2)
        span = t2 - t0
        rho_t = (p2.rho - p0.rho) / span
        drift = -rho_t * s1.rho1 / (s1.v * s1.v)
        h = average_mean_curvature(s1) if volume else 0.0
        f0, f1, f2 = _fields(s0, h), _fields(s1, h), _fields(s2, h)
        for q in which:
            lhs = (f2[q] - f0[q]) / span + drift * central_derivatives(f1[q], s1.dx)[0]
            out[q].append(float(np.max(np.abs(lhs - _rhs(q, s1, h)))))
        times.append(t1)
    return ResidualTable(traj.kind, np.array(times), {q: np.array(v) for q, v in out.items()})


# ------------------------------------------------------- extension audit


@dataclass
class ExtensionVerdict:
    termination: str
    blowup: bool
    h_growth: float
    growth_min: float
    theorem_violation: bool

    @property
    def passed(self) -> bool:
        return not self.theorem_violation


def extension_criterion(traj: FlowTrajectory, growth_min: float = 10.0) -> ExtensionVerdict:
    """Contrapositive of the extension theorems.

    A run that ends in curvature blow-up or pinch-off must show ``max|H|``
    growing by at least ``growth_min``; |A| blowing up under bounded H is
    flagged as a theorem violation (a solver defect).
    """
    h_max = traj.column("maxH")
    growth = float(h_max.max() / h_max[0]) if h_max[0] > 0 else math.inf
    blowup = traj.termination in (Termination.BlowupDetected, Termination.PinchDetected)
    return ExtensionVerdict(
        termination=traj.termination.value,
        blowup=blowup,
        h_growth=growth,
        growth_min=growth_min,
        theorem_violation=bool(blowup and growth < growth_min),
    )


# ---------------------------------------------------------------- report


@dataclass
class MonitorReport:
    checks: dict[str, CheckRecord]
    constants: dict[str, float]
    extension: ExtensionVerdict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json_obj(self) -> list[dict]:
        return [self.checks[name].to_dict() for name in sorted(self.checks)]


def _extension_record(verdict: ExtensionVerdict, t: float) -> CheckRecord:
    # excess of the required growth over the observed one; vacuous without blow-up
    worst = verdict.growth_min / verdict.h_growth - 1.0 if verdict.blowup else -1.0
    return CheckRecord(
        "extension_criterion",
        float(worst),
        t,
        verdict.passed,
        0.0,
        {
            "termination": verdict.termination,
            "h_growth": verdict.h_growth,
            "theorem_violation": verdict.theorem_violation,
        },
    )


def monitor(traj: FlowTrajectory, rel_tol: float = DEFAULT_REL_TOL, growth_min: float = 10.0) -> MonitorReport:
    """Run every check applicable to the trajectory's flow kind."""
    checks: dict[str, CheckRecord] = {}
    constants: dict[str, float] = {}
    c3 = None
    if traj.kind is FlowKind.VolumePreserving:
        rec = check_h_bounds(traj)
        checks[rec.name] = rec
        constants["c2"], constants["c3"] = rec.detail["c2"], rec.detail["c3"]
        c3 = rec.detail["c3"]
    vy = check_vy(traj, c3=c3, rel_tol=rel_tol)
    checks[vy.name] = vy
    constants["c4"] = vy.detail["c4"]
    kp = check_k_over_p(traj, rel_tol=rel_tol)
    checks[kp.name] = kp
    constants["c1"] = kp.detail["c1"]
    C = float(traj.column("maxH").max())
    akp = check_abs_k_over_p(traj, C, c4=constants["c4"], rel_tol=rel_tol)
    checks[akp.name] = akp
    constants["c0"] = akp.detail["c0"]
    verdict = extension_criterion(traj, growth_min)
    checks["extension_criterion"] = _extension_record(verdict, traj.t_final)
    return MonitorReport(checks, constants, verdict)
