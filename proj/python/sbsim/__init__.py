"""Grid-based building thermal simulator, HVAC plant model and calibration."""

from ._core import (
    BuildingConfig,
    SbsimError,
    Simulator,
    TelemetrySeries,
    calibrate,
    format_iso8601,
    generate_synthetic_telemetry,
    load_manifest,
    load_telemetry,
    n_step_eval,
    parse_iso8601,
    parse_manifest,
    parse_telemetry,
    spatial_error,
    theta_bounds,
    theta_defaults,
    theta_midpoint,
)

__all__ = [
    "BuildingConfig",
    "SbsimError",
    "Simulator",
    "TelemetrySeries",
    "calibrate",
    "format_iso8601",
    "generate_synthetic_telemetry",
    "load_manifest",
    "load_telemetry",
    "n_step_eval",
    "parse_iso8601",
    "parse_manifest",
    "parse_telemetry",
    "spatial_error",
    "theta_bounds",
    "theta_defaults",
    "theta_midpoint",
]
