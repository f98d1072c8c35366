"""Flat JSON run configuration with unit-suffixed keys."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .design import DesignConstraints, SensorConfig
from .errors import ConfigError
from .instrument import ClassicalReadout, SpectrometerModel
from .sagnac import SPEED_OF_LIGHT, SagnacConfig
from .spectrum import TILT_CONVENTIONS, ProbeSpec


@dataclass(frozen=True)
class RunConfig:
    # source / probe
    lambda0_nm: float = 840.0
    w_nm: float = 150.0
    i0: float = 1.0
    # fiber loop
    nl_m: float = 500.0
    c_mps: float = SPEED_OF_LIGHT
    # selection
    beta_rad: float = 0.001
    bs_ratio: str = "1:1000"
    # spectrometer
    resolution_nm: float = 0.02
    floor: float = 1e-6
    saturation: float | None = None
    noise_sigma: float = 0.0
    seed: int = 0
    # spectrum synthesis
    grid_points: int = 4096
    dispersion_nm: float = 0.0
    tilt_convention: str = "eq12"
    # design
    target_velocity_mps: float = 3.7e-12
    nl_max_m: float = 500.0
    design_margin: float = 1e-3
    # classical FOG baseline
    phase_resolution_rad: float = 1e-7
    classical_amplitude: float = 1.0
    classical_lambda0_nm: float = 1000.0

    def __post_init__(self):
        _validate(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        return cls(**data)

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("--config", "top level must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def sagnac(self) -> SagnacConfig:
        return SagnacConfig(nl=self.nl_m, lambda0=self.lambda0_nm * 1e-9, c=self.c_mps)

    def probe(self) -> ProbeSpec:
        return ProbeSpec(lambda0=self.lambda0_nm, w=self.w_nm, i0=self.i0)

    def sensor(self) -> SensorConfig:
        return SensorConfig(self.sagnac(), self.probe(), self.beta_rad, self.bs_ratio)

    def spectrometer(self) -> SpectrometerModel:
        return SpectrometerModel(self.resolution_nm, self.floor, self.saturation, self.noise_sigma)

    def constraints(self) -> DesignConstraints:
        return DesignConstraints(
            self.i0, self.floor, self.resolution_nm, self.target_velocity_mps, self.nl_max_m
        )

    def classical(self) -> tuple[SagnacConfig, ClassicalReadout]:
        cfg = SagnacConfig(nl=self.nl_max_m, lambda0=self.classical_lambda0_nm * 1e-9, c=self.c_mps)
        return cfg, ClassicalReadout(self.classical_amplitude, self.phase_resolution_rad)


_POSITIVE = (
    "lambda0_nm", "w_nm", "i0", "nl_m", "c_mps", "resolution_nm", "target_velocity_mps",
    "nl_max_m", "phase_resolution_rad", "classical_amplitude", "classical_lambda0_nm",
)
_NON_NEGATIVE = ("floor", "noise_sigma", "dispersion_nm", "design_margin")


def _number(cfg, key):
    val = getattr(cfg, key)
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(key, f"expected a finite number, got {val!r}")
    return float(val)


def _validate(cfg: RunConfig):
    for key in _POSITIVE:
        if not _number(cfg, key) > 0:
            raise ConfigError(key, "must be positive")
    for key in _NON_NEGATIVE:
        if not _number(cfg, key) >= 0:
            raise ConfigError(key, "must be non-negative")
    beta = _number(cfg, "beta_rad")
    if not 0 <= beta < math.pi / 4:
        raise ConfigError("beta_rad", "must lie in [0, pi/4)")
    if cfg.w_nm >= cfg.lambda0_nm:
        raise ConfigError("w_nm", "must be smaller than lambda0_nm")
    if cfg.floor > cfg.i0:
        raise ConfigError("floor", "must not exceed i0")
    if cfg.saturation is not None and not _number(cfg, "saturation") > cfg.floor:
        raise ConfigError("saturation", "must exceed floor")
    for key in ("grid_points", "seed"):
        val = getattr(cfg, key)
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(key, f"expected an integer, got {val!r}")
    if cfg.grid_points < 16:
        raise ConfigError("grid_points", "must be at least 16")
    if cfg.tilt_convention not in TILT_CONVENTIONS:
        raise ConfigError("tilt_convention", f"must be one of {', '.join(TILT_CONVENTIONS)}")
    if not isinstance(cfg.bs_ratio, str):
        raise ConfigError("bs_ratio", "must be a string such as '1:1000'")
