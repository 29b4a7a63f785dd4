"""Generating-curve representation of an axially symmetric surface.

The surface is obtained by rotating the graph of a radius function
``rho: [a, b] -> (0, inf)`` about the x1-axis.  ``rho`` is sampled on a
uniform grid of ``n_cells + 1`` nodes; the Neumann condition at both ends
is imposed by even reflection through ghost nodes
(``rho[-1] := rho[1]``, ``rho[n+1] := rho[n-1]``).

All derivative stencils are second-order central differences.
"""

from __future__ import annotations

import contextlib
import functools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]

MIN_CELLS = 16
PINCH_FRACTION = 1e-6


class PinchError(ValueError):
    """Raised when a profile touches (or crosses) the rotation axis."""


@dataclass(frozen=True)
class AxisInterval:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True, eq=False)
class RadiusProfile:
    """Radius samples at uniform nodes ``x_j = a + j (b - a) / n_cells``."""

    interval: AxisInterval
    n_cells: int
    rho: FloatArray

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=np.float64)
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ValueError(f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells}")
        if rho.shape != (self.n_cells + 1,):
            raise ValueError(f"rho must have {self.n_cells + 1} entries, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise ValueError("rho contains non-finite values")
        rho.setflags(write=False)
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_function(cls, func, a: float, b: float, n_cells: int) -> "RadiusProfile":
        interval = AxisInterval(float(a), float(b))
        x = node_coordinates(interval, n_cells)
        return cls(interval, n_cells, np.asarray(func(x), dtype=np.float64))

    @property
    def dx(self) -> float:
        return self.interval.length / self.n_cells

    @property
    def x(self) -> FloatArray:
        return node_coordinates(self.interval, self.n_cells)

    @property
    def min_rho(self) -> float:
        return float(self.rho.min())

    @property
    def is_pinched(self) -> bool:
        """Axis contact: ``min rho <= 1e-6 (b - a)``."""
        return self.min_rho <= PINCH_FRACTION * self.interval.length

    def with_rho(self, rho: ArrayLike) -> "RadiusProfile":
        return RadiusProfile(self.interval, self.n_cells, np.asarray(rho, dtype=np.float64))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RadiusProfile):
            return NotImplemented
        return (
            self.interval == other.interval
            and self.n_cells == other.n_cells
            and np.array_equal(self.rho, other.rho)
        )

    __hash__ = None  # type: ignore[assignment]


def node_coordinates(interval: AxisInterval, n_cells: int) -> FloatArray:
    j = np.arange(n_cells + 1, dtype=np.float64)
    return interval.a + j * (interval.length / n_cells)


def _check_positive(rho: FloatArray) -> None:
    if not rho.min() > 0.0:
        j = int(np.argmin(rho))
        raise PinchError(f"profile touches the axis: rho[{j}] = {rho[j]:.3e}")


def _with_ghosts(f: FloatArray) -> FloatArray:
    return np.concatenate((f[1:2], f, f[-2:-1]))


def central_derivatives(f: FloatArray, dx: float) -> tuple[FloatArray, FloatArray]:
    """First and second derivatives of an even-reflected nodal field."""
    g = _with_ghosts(np.asarray(f, dtype=np.float64))
    d1 = (g[2:] - g[:-2]) / (2.0 * dx)
    d2 = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (dx * dx)
    return d1, d2


def derivatives(profile: RadiusProfile) -> tuple[FloatArray, FloatArray]:
    """rho' and rho'' at every node; both ends give ``rho' = 0`` exactly."""
    return central_derivatives(profile.rho, profile.dx)


@functools.lru_cache(maxsize=64)
def trapezoid_weights(n_cells: int, dx: float) -> FloatArray:
    w = np.full(n_cells + 1, dx)
    w[0] = w[-1] = 0.5 * dx
    w.setflags(write=False)
    return w


def integrate(f: FloatArray, dx: float) -> float:
    """Composite trapezoid rule on the uniform grid."""
    f = np.asarray(f, dtype=np.float64)
    return float(np.sum(trapezoid_weights(f.size - 1, dx) * f))


@dataclass(frozen=True, eq=False)
class GeometricState:
    """Pointwise geometry of the rotated surface.

    ``y`` height, ``v`` gradient function, ``p`` rotational and ``k``
    meridian principal curvature, ``q = <nu, i1> / y``, ``H = k + p`` and
    ``A2 = k^2 + p^2``.  ``rho1``/``rho2`` are the stencil derivatives the
    rest was built from.
    """

    y: FloatArray
    v: FloatArray
    p: FloatArray
    k: FloatArray
    q: FloatArray
    H: FloatArray
    A2: FloatArray
    rho1: FloatArray
    rho2: FloatArray
    vy: FloatArray
    enclosed_volume: float
    dx: float = field(repr=False)

    @functools.cached_property
    def surface_area(self) -> float:
        """``2 pi int rho v dx`` by the trapezoid rule."""
        return float(2.0 * np.pi * (trapezoid_weights(self.y.size - 1, self.dx) * self.vy).sum())

    @property
    def A(self) -> FloatArray:
        return np.sqrt(self.A2)

    @property
    def k_over_p(self) -> FloatArray:
        return self.k / self.p

    @property
    def area_element(self) -> FloatArray:
        """Integrand of the area, ``2 pi rho sqrt(1 + rho'^2)`` per unit x."""
        return 2.0 * np.pi * self.y * self.v

    def identity_residuals(self) -> tuple[float, float]:
        """Max relative defects of ``p^2 + q^2 = y^-2`` and ``vy = 1/p``."""
        # relative defects written as products: |(p^2 + q^2) y^2 - 1|, |vy p - 1|
        p, q, y = self.p, self.q, self.y
        pq = np.abs((p * p + q * q) * (y * y) - 1.0).max()
        vy = np.abs(self.vy * p - 1.0).max()
        return float(pq), float(vy)


class IdentityAudit:
    """Collects identity defects of every GeometricState built while active."""

    def __init__(self) -> None:
        self.count = 0
        self.max_pq = 0.0
        self.max_vy = 0.0

    def record(self, state: GeometricState) -> None:
        pq, vy = state.identity_residuals()
        self.count += 1
        self.max_pq = max(self.max_pq, pq)
        self.max_vy = max(self.max_vy, vy)


_AUDITS: list[IdentityAudit] = []


@contextlib.contextmanager
def audit_identities() -> Iterator[IdentityAudit]:
    audit = IdentityAudit()
    _AUDITS.append(audit)
    try:
        yield audit
    finally:
        _AUDITS.remove(audit)


def _state_from_arrays(rho: FloatArray, dx: float) -> GeometricState:
    _check_positive(rho)
    rho1, rho2 = central_derivatives(rho, dx)
    g = 1.0 + rho1 * rho1
    v = np.sqrt(g)
    rv = rho * v
    p = 1.0 / rv
    k = -rho2 / (g * v)
    q = -rho1 / rv
    w = trapezoid_weights(rho.size - 1, dx)
    state = GeometricState(
        y=rho,
        v=v,
        p=p,
        k=k,
        q=q,
        H=k + p,
        A2=k * k + p * p,
        rho1=rho1,
        rho2=rho2,
        vy=rv,
        enclosed_volume=float(np.pi * (w * (rho * rho)).sum()),
        dx=dx,
    )
    for audit in _AUDITS:
        audit.record(state)
    return state


def geometric_state(profile: RadiusProfile) -> GeometricState:
    """Evaluate every pointwise curvature quantity of ``profile``.

    Raises:
        PinchError: if any radius sample is non-positive.
    """
    return _state_from_arrays(profile.rho, profile.dx)


def surface_laplacian(profile: RadiusProfile, f: ArrayLike) -> FloatArray:
    """Laplace-Beltrami operator of a rotationally symmetric function.

    Conservative form ``(1/(rho v)) d/dx(rho f' / v)`` with face values
    of ``rho / v`` taken at half nodes; constants map to exactly zero.
    """
    _check_positive(profile.rho)
    return _laplacian(profile.rho, np.asarray(f, dtype=np.float64), profile.dx)


def _laplacian(rho: FloatArray, f: FloatArray, dx: float) -> FloatArray:
    if f.shape != rho.shape:
        raise ValueError(f"f has shape {f.shape}, expected {rho.shape}")
    rg = _with_ghosts(rho)
    fg = _with_ghosts(f)
    drho = np.diff(rg) / dx
    coef = 0.5 * (rg[1:] + rg[:-1]) / np.sqrt(1.0 + drho * drho)
    flux = coef * np.diff(fg)
    rho1 = (rg[2:] - rg[:-2]) / (2.0 * dx)
    return (flux[1:] - flux[:-1]) / (dx * dx * rho * np.sqrt(1.0 + rho1 * rho1))


# ---------------------------------------------------------------- snapshot IO


def profile_to_dict(profile: RadiusProfile, t: float) -> dict:
    return {
        "a": float(profile.interval.a),
        "b": float(profile.interval.b),
        "n_cells": profile.n_cells,
        "rho": [float(r) for r in profile.rho],
        "t": float(t),
    }


def profile_from_dict(data: dict) -> tuple[float, RadiusProfile]:
    try:
        interval = AxisInterval(float(data["a"]), float(data["b"]))
        profile = RadiusProfile(interval, int(data["n_cells"]), np.asarray(data["rho"], dtype=np.float64))
        t = float(data.get("t", 0.0))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed profile snapshot: {exc}") from exc
    return t, profile


def write_profile(path: str | Path, profile: RadiusProfile, t: float, **extra: float) -> None:
    """Write a snapshot; Python's float repr round-trips exactly."""
    data = profile_to_dict(profile, t)
    data.update(extra)
    Path(path).write_text(json.dumps(data) + "\n", encoding="utf-8")


def read_profile(path: str | Path) -> tuple[float, RadiusProfile]:
    return profile_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
