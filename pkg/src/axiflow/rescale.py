"""Blow-up rescaling about the curvature-maximising spacetime point.

Given the point ``(l_i, t_i)`` where ``|A|`` attains its maximum ``alpha``
over a time window, surfaces are zoomed by ``alpha`` about the axis point
below ``x(l_i, t_i)``:

    x~ = alpha (x - x1_i),   rho~ = alpha rho,   tau = alpha^2 (t - t_i)

so that the rescaled ``|A~| <= 1`` on the window with equality at the
event.  Under bounded H the rescaled surfaces would approach a catenoid;
:func:`catenoid_fit` measures how close a rescaled profile is to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .flow import FlowTrajectory, average_mean_curvature
from .profile import AxisInterval, FloatArray, RadiusProfile, geometric_state

FIT_BOX = (1e-3, 1e3)
MIN_FIT_NODES = 8


class EmptyWindow(ValueError):
    """No snapshot at or before the deadline."""


class FitDiverged(RuntimeError):
    pass


class NonPositiveArgument(ValueError):
    """The contradiction scale does not exist at this alpha."""


@dataclass(frozen=True)
class RescaleEvent:
    alpha: float
    t_i: float
    node_index: int
    x1_i: float
    snapshot_index: int = -1


@dataclass(frozen=True)
class RescaledProfile:
    x_tilde: FloatArray
    rho_tilde: FloatArray
    tau: float
    alpha: float
    H_tilde: FloatArray
    A_tilde: FloatArray
    h_tilde: float
    x1_i: float = 0.0
    t: float = 0.0

    def as_profile(self) -> RadiusProfile:
        """The rescaled curve as a profile over its own x~ range."""
        n = self.x_tilde.size - 1
        return RadiusProfile(AxisInterval(float(self.x_tilde[0]), float(self.x_tilde[-1])), n, self.rho_tilde)


@dataclass(frozen=True)
class CatenoidFit:
    c5: float
    x0: float
    rms_residual: float
    n_points: int = 0


def max_curvature_event(traj: FlowTrajectory, deadline: float | None = None) -> RescaleEvent:
    """Locate ``max |A|`` over stored snapshots with ``t <= deadline``.

    Ties go to the latest time, then to the leftmost node.
    """
    if deadline is None:
        deadline = traj.snapshots[-1][0]
    best = None
    for idx, (t, prof) in enumerate(traj.snapshots):
        if t > deadline:
            continue
        A = geometric_state(prof).A
        j = int(np.argmax(A))  # first occurrence = leftmost
        if best is None or A[j] >= best[0]:
            best = (float(A[j]), t, j, float(prof.x[j]), idx)
    if best is None:
        raise EmptyWindow(f"no snapshot at or before t = {deadline}")
    return RescaleEvent(*best)


def rescale(snapshot: tuple[float, RadiusProfile], event: RescaleEvent) -> RescaledProfile:
    t, prof = snapshot
    a = event.alpha
    state = geometric_state(prof)
    return RescaledProfile(
        x_tilde=a * (prof.x - event.x1_i),
        rho_tilde=a * prof.rho,
        tau=a * a * (t - event.t_i),
        alpha=a,
        H_tilde=state.H / a,
        A_tilde=state.A / a,
        h_tilde=average_mean_curvature(state) / a,
        x1_i=event.x1_i,
        t=t,
    )


def rescale_trajectory(traj: FlowTrajectory, event: RescaleEvent, deadline: float | None = None) -> list[RescaledProfile]:
    if deadline is None:
        deadline = event.t_i
    return [rescale(s, event) for s in traj.snapshots if s[0] <= deadline]


@dataclass(frozen=True)
class HeightBoundVerdict:
    max_product: float
    c5: float
    passed: bool


def height_bound_constant(c0: float) -> float:
    """``c5`` with ``|A| <= c5 p`` given ``|k|/p <= c0``."""
    return math.sqrt(1.0 + c0 * c0)


def check_rescaled_height_bound(rp: RescaledProfile, c5: float, tol: float = 1e-9) -> HeightBoundVerdict:
    """Audit ``|A~| rho~ <= c5``."""
    prod = float(np.max(rp.A_tilde * rp.rho_tilde))
    return HeightBoundVerdict(prod, c5, prod <= c5 + tol)


# ----------------------------------------------------------- catenoid fit


def catenoid(x: FloatArray, c: float, x0: float) -> FloatArray:
    return c * np.cosh((np.asarray(x) - x0) / c)


def _residual(params: FloatArray, x: FloatArray, y: FloatArray) -> FloatArray:
    c, x0 = params
    with np.errstate(over="ignore", invalid="ignore"):
        r = catenoid(x, c, x0) - y
    return np.where(np.isfinite(r), r, 1e150)


def _jacobian(params: FloatArray, x: FloatArray, y: FloatArray) -> FloatArray:
    c, x0 = params
    u = (x - x0) / c
    with np.errstate(over="ignore", invalid="ignore"):
        jac = np.column_stack((np.cosh(u) - u * np.sinh(u), -np.sinh(u)))
    return np.where(np.isfinite(jac), jac, 1e150)


def fit_catenoid(x: FloatArray, rho: FloatArray, n_c: int = 61, n_x0: int = 41) -> CatenoidFit:
    """Least-squares ``rho ~ c cosh((x - x0)/c)``.

    Log-spaced grid over ``c`` in the fit box and a uniform grid over
    ``x0`` spanning the data, then Levenberg-Marquardt from the best node.

    Raises:
        FitDiverged: if the refined parameters leave the search box.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(rho, dtype=np.float64)
    if x.size < MIN_FIT_NODES:
        raise ValueError(f"need at least {MIN_FIT_NODES} nodes, got {x.size}")
    lo, hi = float(x.min()), float(x.max())
    cs = np.logspace(math.log10(FIT_BOX[0]), math.log10(FIT_BOX[1]), n_c)
    x0s = lo + (hi - lo) * np.linspace(0.0, 1.0, n_x0)
    with np.errstate(over="ignore", invalid="ignore"):
        C, X0 = cs[:, None, None], x0s[None, :, None]
        sse = np.sum((C * np.cosh((x[None, None, :] - X0) / C) - y) ** 2, axis=-1)
    sse = np.where(np.isfinite(sse), sse, np.inf)
    i, j = np.unravel_index(int(np.argmin(sse)), sse.shape)
    start = np.array([cs[i], x0s[j]])
    sol = least_squares(
        _residual, start, jac=_jacobian, args=(x, y), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000
    )
    c, x0 = (float(v) for v in sol.x)
    if not (FIT_BOX[0] <= c <= FIT_BOX[1] and lo <= x0 <= hi):
        raise FitDiverged(f"fit left the search box: c={c:.4g}, x0={x0:.4g}")
    rms = float(np.sqrt(np.mean((catenoid(x, c, x0) - y) ** 2)))
    return CatenoidFit(c5=c, x0=x0, rms_residual=rms, n_points=int(x.size))


def fit_window(x: FloatArray, y: FloatArray, half_width: float | None = None) -> tuple[FloatArray, FloatArray]:
    """Nodes with ``|x| <= half_width``; widened to the nearest 8 if sparse."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if half_width is None:
        return x, y
    mask = np.abs(x) <= half_width
    if mask.sum() < MIN_FIT_NODES:
        keep = np.sort(np.argsort(np.abs(x), kind="stable")[:MIN_FIT_NODES])
        return x[keep], y[keep]
    return x[mask], y[mask]


def catenoid_fit(rp: RescaledProfile, half_width: float | None = None) -> CatenoidFit:
    return fit_catenoid(*fit_window(rp.x_tilde, rp.rho_tilde, half_width))


# ------------------------------------------------------- contradiction


def contradiction_scale(
    fit: CatenoidFit | float, c4: float, alpha_i: float, eps1: float = 1e-3, eps2: float = 1e-3
) -> float:
    """Rescaled axis distance past which the catenoid forces ``vy > c4``.

    ``2 c5 log((4 alpha/c5)(c4 + eps1/alpha) - 1) + eps2``.

    Raises:
        NonPositiveArgument: if the logarithm's argument is <= 1.
    """
    c5 = fit.c5 if isinstance(fit, CatenoidFit) else float(fit)
    arg = 4.0 * alpha_i / c5 * (c4 + eps1 / alpha_i) - 1.0
    if not arg > 1.0:
        raise NonPositiveArgument(f"log argument {arg:.6g} <= 1 at alpha={alpha_i:.6g}")
    return 2.0 * c5 * math.log(arg) + eps2


contradiction_diagnostic = contradiction_scale


def catenoid_vy_proxy(x_hat, c5: float, alpha_i: float, eps1: float = 1e-3, eps2: float = 1e-3):
    """Lower bound on the unscaled vy implied by a catenoid limit."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    return c5 / (4.0 * alpha_i) * (np.exp((x_hat - eps2) / (2.0 * c5)) + 1.0) - eps1 / alpha_i
