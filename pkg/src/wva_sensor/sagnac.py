"""Generalized Sagnac phase from moving fiber segments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def _vec3(x, name):
    t = tuple(float(c) for c in x)
    if len(t) != 3:
        raise ValueError(f"{name} must have 3 components")
    if not all(math.isfinite(c) for c in t):
        raise ValueError(f"{name} must be finite")
    return t


@dataclass(frozen=True)
class PathSegment:
    """A rigid straight piece of fiber.

    ``direction`` is the unit tangent in the sense the clockwise beam
    traverses it; ``velocity`` is the (constant) lab-frame velocity in m/s.
    """

    length: float
    direction: tuple[float, float, float]
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError(f"segment length must be positive, got {self.length!r}")
        d = _vec3(self.direction, "direction")
        if abs(math.sqrt(sum(c * c for c in d)) - 1.0) > 1e-12:
            raise ValueError("segment direction must be a unit vector")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))

    def line_element(self) -> float:
        """(velocity . direction) * length, in m^2/s."""
        d, u = self.direction, self.velocity
        return (d[0] * u[0] + d[1] * u[1] + d[2] * u[2]) * self.length

    def split(self) -> tuple[PathSegment, PathSegment]:
        half = PathSegment(self.length / 2, self.direction, self.velocity)
        return half, half

    def reversed(self) -> PathSegment:
        return PathSegment(self.length, tuple(-c for c in self.direction), self.velocity)


@dataclass(frozen=True)
class LoopGeometry:
    segments: tuple[PathSegment, ...]
    turns: int = 1

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("loop needs at least one segment")
        if int(self.turns) != self.turns or self.turns < 1:
            raise ValueError(f"turns must be a positive integer, got {self.turns!r}")


@dataclass(frozen=True)
class SagnacConfig:
    nl: float  # total moving-arm fiber length N*L, m
    lambda0: float  # free-space central wavelength, m
    c: float = field(default=SPEED_OF_LIGHT)

    def __post_init__(self):
        for name in ("nl", "lambda0", "c"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")


def _phase_scale(integral: float, cfg: SagnacConfig) -> float:
    return 4 * math.pi * integral / (cfg.c * cfg.lambda0)


def phase_from_velocity(cfg: SagnacConfig, v: float) -> float:
    """Phase (rad) from the top arm moving at ``v`` m/s along its length."""
    return _phase_scale(v * cfg.nl, cfg)


def velocity_from_phase(cfg: SagnacConfig, phi: float) -> float:
    return phi * cfg.c * cfg.lambda0 / (4 * math.pi * cfg.nl)


def phase_from_path(geom: LoopGeometry, cfg: SagnacConfig) -> float:
    """Segment-sum form of the closed line integral of v . dl, times N turns.

    Only ``cfg.lambda0`` and ``cfg.c`` are used; lengths come from the geometry.
    """
    integral = math.fsum(seg.line_element() for seg in geom.segments)
    return _phase_scale(geom.turns * integral, cfg)


def canonical_geometry(
    v: float,
    arm_length: float,
    turns: int = 1,
    side_length: float = 1.0,
    side_velocity: Sequence[float] = (0.0, 0.0, 0.0),
) -> LoopGeometry:
    """Four-arm conveyor loop: moving top arm, fixed bottom arm, flexing sides.

    The loop is traversed +x along the top, -y down the right side, -x along
    the bottom and +y up the left side. Both side arms share ``side_velocity``
    so their contributions cancel, leaving only the top arm.
    """
    side = tuple(side_velocity)
    return LoopGeometry(
        segments=(
            PathSegment(arm_length, (1.0, 0.0, 0.0), (v, 0.0, 0.0)),
            PathSegment(side_length, (0.0, -1.0, 0.0), side),
            PathSegment(arm_length, (-1.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
            PathSegment(side_length, (0.0, 1.0, 0.0), side),
        ),
        turns=turns,
    )
