"""Cloud-controlled AGV tracking simulator (Python bindings)."""

from ._cloudagv import (
    ConfigError,
    ControlInput,
    ErrorVec,
    Gains,
    Pose,
    ReferencePoint,
    check_stability_step,
    compute_error,
    control_law,
    control_matrix_A,
    eigenvalues_3x3,
    load_config,
    normalize_angle,
    parse_config,
    run,
    saturate,
    stability_map,
    step_euler,
)

__all__ = [
    "ConfigError",
    "ControlInput",
    "ErrorVec",
    "Gains",
    "Pose",
    "ReferencePoint",
    "check_stability_step",
    "compute_error",
    "control_law",
    "control_matrix_A",
    "eigenvalues_3x3",
    "load_config",
    "normalize_angle",
    "parse_config",
    "run",
    "saturate",
    "stability_map",
    "step_euler",
]
