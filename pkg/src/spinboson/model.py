"""Physical parameters, drive specification and numerical configuration.

Everything is expressed in units of the photon frequency: ``omega`` is fixed
to 1, times are in units of ``1/omega`` and all couplings and amplitudes are
ratios to ``omega``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError, ValidationError

#: Default long-time window ``T_L = 50 pi / omega``.
DEFAULT_T_END = 50.0 * math.pi

QUADRATURE_RULES = ("trapezoid",)


class DriveKind(str, Enum):
    """Which degree of freedom the static drive couples to."""

    PHOTON = "photon"  # Omega_p (a^dag + a)
    ATOM = "atom"  # Omega_a sigma_x
    NONE = "none"


@dataclass(frozen=True)
class RampProfile:
    """Linear switch-on of the drive over ``rise_time``; 0 means instantaneous."""

    rise_time: float = 0.0


@dataclass(frozen=True)
class DriveSpec:
    kind: DriveKind = DriveKind.NONE
    amplitude: float = 0.0
    ramp: RampProfile = field(default_factory=RampProfile)

    def __post_init__(self):
        object.__setattr__(self, "kind", DriveKind(self.kind))

    @classmethod
    def photon(cls, amplitude: float, rise_time: float = 0.0) -> "DriveSpec":
        return cls(DriveKind.PHOTON, float(amplitude), RampProfile(float(rise_time)))

    @classmethod
    def atom(cls, amplitude: float, rise_time: float = 0.0) -> "DriveSpec":
        return cls(DriveKind.ATOM, float(amplitude), RampProfile(float(rise_time)))


@dataclass(frozen=True)
class ModelParams:
    """Spin-boson parameters ``g``, ``epsilon`` plus a drive.

    ``omega`` is carried for bookkeeping only and must equal 1.
    """

    g: float
    epsilon: float = 0.0
    drive: DriveSpec = field(default_factory=DriveSpec)
    omega: float = 1.0

    def with_amplitude(self, amplitude: float) -> "ModelParams":
        return replace(self, drive=replace(self.drive, amplitude=float(amplitude)))

    def with_drive(self, drive: DriveSpec) -> "ModelParams":
        return replace(self, drive=drive)

    @property
    def is_photon_driven(self) -> bool:
        return self.drive.kind is DriveKind.PHOTON


@dataclass(frozen=True)
class NumericsConfig:
    """Numerical settings for a run.

    Attributes
    ----------
    n_max : int or None
        Highest retained photon number. ``None`` selects
        :func:`suggested_truncation`.
    dt : float
        Sampling interval, and the step of the ramped propagator.
    t_end : float
        Final time; defaults to ``50 pi``.
    sample_stride : int
        Keep every ``sample_stride``-th step in the output series.
    quadrature : str
        Time-averaging rule.
    seed : int
        Root seed for any randomised input.
    """

    n_max: int | None = None
    dt: float = 1e-3
    t_end: float = DEFAULT_T_END
    sample_stride: int = 1
    quadrature: str = "trapezoid"
    seed: int = 0


def validate(params: ModelParams, cfg: NumericsConfig | None = None) -> list[str]:
    """Return every violated invariant as a readable message (empty if valid)."""
    out = []
    if params.omega != 1.0:
        out.append("omega must be 1 (internal units of omega)")
    if not math.isfinite(params.g) or params.g < 0:
        out.append("g must be ≥ 0")
    if not math.isfinite(params.epsilon) or params.epsilon < 0:
        out.append("epsilon must be ≥ 0")
    drive = params.drive
    if not math.isfinite(drive.amplitude) or drive.amplitude < 0:
        out.append("drive amplitude must be ≥ 0")
    if drive.kind is DriveKind.NONE and drive.amplitude != 0:
        out.append("None drive must have zero amplitude")
    if not math.isfinite(drive.ramp.rise_time) or drive.ramp.rise_time < 0:
        out.append("rise time must be ≥ 0")
    if cfg is not None:
        if cfg.n_max is not None and (int(cfg.n_max) != cfg.n_max or cfg.n_max < 1):
            out.append("n_max must be an integer ≥ 1")
        if not cfg.dt > 0:
            out.append("dt must be > 0")
        if not cfg.t_end > 0:
            out.append("t_end must be > 0")
        if int(cfg.sample_stride) != cfg.sample_stride or cfg.sample_stride < 1:
            out.append("sample_stride must be an integer ≥ 1")
        if cfg.quadrature not in QUADRATURE_RULES:
            out.append(f"unknown quadrature rule {cfg.quadrature!r}")
        if int(cfg.seed) != cfg.seed or not 0 <= cfg.seed < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
    return out


def require_valid(params: ModelParams, cfg: NumericsConfig | None = None) -> None:
    """Raise :class:`ValidationError` if :func:`validate` reports anything."""
    problems = validate(params, cfg)
    if problems:
        raise ValidationError(problems)


def effective_amplitude(drive: DriveSpec, t: float) -> float:
    """Instantaneous drive amplitude under the linear ramp."""
    tc = drive.ramp.rise_time
    if tc > 0 and t < tc:
        return t * drive.amplitude / tc
    return drive.amplitude


def coherent_extent(params: ModelParams) -> float:
    """Largest coherent-label magnitude reached from the polaron states."""
    if params.drive.kind is DriveKind.PHOTON:
        # equilibrium displacement (g + Omega) plus orbit radius Omega
        return (params.g + params.drive.amplitude) / params.omega + params.drive.amplitude / params.omega
    return params.g / params.omega


def suggested_truncation(params: ModelParams, initial_photons: int = 0) -> int:
    """Fock cutoff ``ceil((z + 4)^2)`` for maximal coherent label ``z``.

    ``initial_photons`` widens the estimate for initial states with support
    up to that Fock level (the label is shifted by its square root).
    """
    z = coherent_extent(params) + math.sqrt(initial_photons)
    return max(1, math.ceil(z * z + 8 * z + 16))


def resolve_truncation(params: ModelParams, cfg: NumericsConfig, initial_photons: int = 0) -> int:
    if cfg.n_max is not None:
        return int(cfg.n_max)
    return suggested_truncation(params, initial_photons)


# -- configuration documents -------------------------------------------------

_SECTIONS = {
    "model": {"g", "epsilon", "omega"},
    "drive": {"kind", "amplitude", "rise_time"},
    "numerics": {"n_max", "dt", "t_end", "sample_stride", "quadrature", "seed"},
    "physical": {"omega_ghz"},
}


def params_from_dict(doc: Mapping[str, Any]) -> tuple[ModelParams, NumericsConfig, dict]:
    """Build run inputs from a configuration mapping (strict: unknown keys fail).

    Returns ``(params, cfg, physical)``; ``physical`` holds the optional
    unit-conversion data and is never used by the simulation itself.
    """
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    sections = {}
    for name, allowed in _SECTIONS.items():
        sec = doc.get(name, {})
        if not isinstance(sec, Mapping):
            raise ConfigError(f"section {name!r} must be an object")
        bad = set(sec) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
        sections[name] = dict(sec)

    model = sections["model"]
    if "g" not in model:
        raise ConfigError("model.g is required")
    drv = sections["drive"]
    try:
        drive = DriveSpec(
            DriveKind(drv.get("kind", "none")),
            float(drv.get("amplitude", 0.0)),
            RampProfile(float(drv.get("rise_time", 0.0))),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    params = ModelParams(
        g=float(model["g"]),
        epsilon=float(model.get("epsilon", 0.0)),
        drive=drive,
        omega=float(model.get("omega", 1.0)),
    )
    num = sections["numerics"]
    cfg = NumericsConfig(**{k: v for k, v in num.items()})
    return params, cfg, sections["physical"]


def load_config(path: str | Path) -> tuple[ModelParams, NumericsConfig, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return params_from_dict(doc)


def params_to_dict(params: ModelParams, cfg: NumericsConfig | None = None) -> dict:
    """Inverse of :func:`params_from_dict` (without the ``physical`` section)."""
    doc = {
        "model": {"g": params.g, "epsilon": params.epsilon, "omega": params.omega},
        "drive": {
            "kind": params.drive.kind.value,
            "amplitude": params.drive.amplitude,
            "rise_time": params.drive.ramp.rise_time,
        },
    }
    if cfg is not None:
        doc["numerics"] = asdict(cfg)
    return doc
