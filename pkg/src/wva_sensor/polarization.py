"""Polarization pre/post-selection and weak-value algebra on the {H, V} basis.

|H> circulates the loop clockwise and |V> counterclockwise, so the
interferometric phase enters the post-selected state as e^{+i phi} on H and
e^{-i phi} on V.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePostselection

PRESELECTION_ANGLE = math.pi / 4
# p_postselect below this is treated as exactly orthogonal selection.
DEGENERACY_THRESHOLD = 1e-30
# weak_value_raw / closed-form a_w, measured against the raw-state oracle.
# The closed form omits the 1/2 eigenvalue scale of the canonical observable.
RAW_TO_CLOSED_FORM = 0.5

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PolarizationState:
    h: complex
    v: complex

    def __post_init__(self):
        norm = abs(self.h) ** 2 + abs(self.v) ** 2
        if not math.isfinite(norm) or abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"polarization state not normalized: |h|^2 + |v|^2 = {norm!r}")

    @classmethod
    def from_amplitudes(cls, h: complex, v: complex) -> PolarizationState:
        """Build a state from arbitrary (nonzero) amplitudes, normalizing them."""
        norm = math.sqrt(abs(h) ** 2 + abs(v) ** 2)
        if norm == 0.0 or not math.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite state")
        return cls(complex(h) / norm, complex(v) / norm)

    @classmethod
    def horizontal(cls) -> PolarizationState:
        return cls(1 + 0j, 0j)

    @classmethod
    def vertical(cls) -> PolarizationState:
        return cls(0j, 1 + 0j)

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.v], dtype=complex)

    def overlap(self, other: PolarizationState) -> complex:
        """<self|other>."""
        return self.h.conjugate() * other.h + self.v.conjugate() * other.v

    @property
    def intensities(self) -> tuple[float, float]:
        return abs(self.h) ** 2, abs(self.v) ** 2


@dataclass(frozen=True, eq=False)
class Observable2:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"observable must be 2x2, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("observable is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def canonical(cls) -> Observable2:
        """(|H><H| - |V><V|) / 2."""
        return cls(np.diag([0.5, -0.5]).astype(complex))

    def expectation_between(self, bra: PolarizationState, ket: PolarizationState) -> complex:
        """<bra|A|ket>."""
        return complex(bra.as_array().conj() @ self.matrix @ ket.as_array())


@dataclass(frozen=True)
class WeakValueResult:
    a_w: complex
    im_a_w: float
    p_postselect: float


def preselect() -> PolarizationState:
    """Linear polarizer at pi/4 followed by a quarter-wave retardance on V."""
    return PolarizationState(
        complex(math.sin(PRESELECTION_ANGLE)), 1j * math.cos(PRESELECTION_ANGLE)
    )


def postselect(beta: float, phi: float) -> PolarizationState:
    """Post-selected state for polarizer offset ``beta`` and loop phase ``phi`` (rad)."""
    if not (math.isfinite(beta) and math.isfinite(phi)):
        raise ValueError("beta and phi must be finite")
    angle = PRESELECTION_ANGLE + beta
    return PolarizationState(
        1j * math.sin(angle) * cmath.exp(1j * phi),
        math.cos(angle) * cmath.exp(-1j * phi),
    )


def postselection_probability(beta: float, phi: float) -> float:
    """|<phi_f|phi_i>|^2 = sin^2(phi) cos^2(beta) + sin^2(beta) cos^2(phi)."""
    sp, cp = math.sin(phi), math.cos(phi)
    sb, cb = math.sin(beta), math.cos(beta)
    return sp * sp * cb * cb + sb * sb * cp * cp


def im_weak_value(beta: float, phi: float) -> float:
    sp, cp = math.sin(phi), math.cos(phi)
    sb, cb = math.sin(beta), math.cos(beta)
    den = sp * sp * cb * cb + sb * sb * cp * cp
    if den < DEGENERACY_THRESHOLD:
        raise DegeneratePostselection(
            f"orthogonal pre/post-selection at beta={beta!r}, phi={phi!r}"
        )
    return sp * cp * (cb * cb - sb * sb) / den


def weak_value_closed_form(beta: float, phi: float) -> WeakValueResult:
    """Weak value, its imaginary part and the post-selection probability.

    Raises DegeneratePostselection when the probability falls below
    ``DEGENERACY_THRESHOLD``.
    """
    p = postselection_probability(beta, phi)
    if p < DEGENERACY_THRESHOLD:
        raise DegeneratePostselection(
            f"orthogonal pre/post-selection at beta={beta!r}, phi={phi!r} (p={p!r})"
        )
    sp, cp = math.sin(phi), math.cos(phi)
    sb, cb = math.sin(beta), math.cos(beta)
    a_w = complex(sp * sb, cp * cb) / complex(sp * cb, sb * cp)
    return WeakValueResult(a_w=a_w, im_a_w=im_weak_value(beta, phi), p_postselect=p)


def weak_value_raw(
    pre: PolarizationState, post: PolarizationState, obs: Observable2 | None = None
) -> complex:
    """<post|A|pre> / <post|pre> evaluated directly from the amplitudes."""
    if obs is None:
        obs = Observable2.canonical()
    amp = post.overlap(pre)
    if abs(amp) ** 2 < DEGENERACY_THRESHOLD:
        raise DegeneratePostselection("orthogonal pre/post-selection (|<post|pre>|^2 < 1e-30)")
    return obs.expectation_between(post, pre) / amp
