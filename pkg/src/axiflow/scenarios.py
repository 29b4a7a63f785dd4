"""Preset initial profiles.

Flowable presets are built from cosine modes ``cos(m pi (x - a)/(b - a))``
with integer ``m``, so the even ghost reflection reproduces them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .profile import AxisInterval, RadiusProfile, node_coordinates

DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "cylinder": {"r": 1.0},
    "perturbed_cylinder": {"r": 1.0, "eps": 0.1, "m": 2},
    "neck": {"r0": 0.6, "amp": 0.35},
    "catenoid_segment": {"c": 0.5, "x0": 0.5},
}
ALIASES = {
    "cylinder": "cylinder",
    "perturbedcylinder": "perturbed_cylinder",
    "perturbed_cylinder": "perturbed_cylinder",
    "neck": "neck",
    "catenoid": "catenoid_segment",
    "catenoidsegment": "catenoid_segment",
    "catenoid_segment": "catenoid_segment",
}


@dataclass(frozen=True)
class Scenario:
    name: str
    interval: AxisInterval = AxisInterval(0.0, 1.0)
    n_cells: int = 200
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        key = ALIASES.get(self.name.strip().lower())
        if key is None:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {sorted(DEFAULT_PARAMS)}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[key])
        if unknown:
            raise ValueError(f"unknown parameters for {key}: {sorted(unknown)}")
        merged = {**DEFAULT_PARAMS[key], **self.params}
        object.__setattr__(self, "name", key)
        object.__setattr__(self, "params", merged)
        if key == "perturbed_cylinder" and int(merged["m"]) != merged["m"]:
            raise ValueError("perturbed_cylinder mode m must be an integer")

    @property
    def flowable(self) -> bool:
        """Catenoid segments violate the Neumann condition; geometry only."""
        return self.name != "catenoid_segment"

    def radius(self, x: np.ndarray) -> np.ndarray:
        a, length = self.interval.a, self.interval.length
        s = (x - a) / length
        P = self.params
        if self.name == "cylinder":
            return np.full_like(x, P["r"])
        if self.name == "perturbed_cylinder":
            return P["r"] * (1.0 + P["eps"] * np.cos(int(P["m"]) * np.pi * s))
        if self.name == "neck":
            return P["r0"] + P["amp"] * np.cos(2.0 * np.pi * s)
        c, x0 = P["c"], P["x0"]
        return c * np.cosh((x - x0) / c)

    def profile(self) -> RadiusProfile:
        x = node_coordinates(self.interval, self.n_cells)
        return RadiusProfile(self.interval, self.n_cells, self.radius(x))


def cylinder(r: float = 1.0, a: float = 0.0, b: float = 1.0, n_cells: int = 200) -> RadiusProfile:
    return Scenario("cylinder", AxisInterval(a, b), n_cells, {"r": r}).profile()


def perturbed_cylinder(
    r: float = 1.0, eps: float = 0.1, m: int = 2, a: float = 0.0, b: float = 1.0, n_cells: int = 200
) -> RadiusProfile:
    return Scenario("perturbed_cylinder", AxisInterval(a, b), n_cells, {"r": r, "eps": eps, "m": m}).profile()


def neck(r0: float = 0.6, amp: float = 0.35, a: float = 0.0, b: float = 1.0, n_cells: int = 200) -> RadiusProfile:
    return Scenario("neck", AxisInterval(a, b), n_cells, {"r0": r0, "amp": amp}).profile()


def catenoid_segment(
    c: float = 0.5, x0: float = 0.5, a: float = 0.0, b: float = 1.0, n_cells: int = 200
) -> RadiusProfile:
    return Scenario("catenoid_segment", AxisInterval(a, b), n_cells, {"c": c, "x0": x0}).profile()
