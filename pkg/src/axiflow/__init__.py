"""Axially symmetric mean curvature flow and volume-preserving flow."""

from .flow import (
    FlowConfig,
    FlowKind,
    FlowTrajectory,
    StepRecord,
    Termination,
    average_mean_curvature,
    rhs,
    run,
    step,
)
from .profile import (
    AxisInterval,
    GeometricState,
    PinchError,
    RadiusProfile,
    audit_identities,
    derivatives,
    geometric_state,
    surface_laplacian,
)

__version__ = "0.1.0"

__all__ = [
    "AxisInterval",
    "FlowConfig",
    "FlowKind",
    "FlowTrajectory",
    "GeometricState",
    "PinchError",
    "RadiusProfile",
    "StepRecord",
    "Termination",
    "audit_identities",
    "average_mean_curvature",
    "derivatives",
    "geometric_state",
    "rhs",
    "run",
    "step",
    "surface_laplacian",
]
