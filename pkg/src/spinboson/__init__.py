"""Driven spin-boson model: exact numerics, closed forms and the drive-amplitude resonance."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DriveKind,
    DriveSpec,
    ModelParams,
    NumericsConfig,
    RampProfile,
    effective_amplitude,
    suggested_truncation,
    validate,
)

__all__ = [
    "DriveKind",
    "DriveSpec",
    "ModelParams",
    "NumericsConfig",
    "RampProfile",
    "effective_amplitude",
    "suggested_truncation",
    "validate",
]
