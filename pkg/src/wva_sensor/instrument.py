"""Measurement-chain limits: spectrometer binning, detection limit, classical FOG readout."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridCoarserThanResolution
from .sagnac import SagnacConfig, velocity_from_phase
from .spectrum import Spectrum

DEFAULT_RESOLUTION_NM = 0.02
FOG_PHASE_RESOLUTION = 1e-7  # rad


@dataclass(frozen=True)
class SpectrometerModel:
    resolution: float = DEFAULT_RESOLUTION_NM  # nm
    intensity_floor: float = 0.0
    saturation: float | None = None
    noise_sigma: float = 0.0  # additive per-bin Gaussian noise, off by default

    def __post_init__(self):
        if not (math.isfinite(self.resolution) and self.resolution > 0):
            raise ValueError(f"resolution must be positive, got {self.resolution!r}")
        if not (math.isfinite(self.intensity_floor) and self.intensity_floor >= 0):
            raise ValueError(f"intensity_floor must be >= 0, got {self.intensity_floor!r}")
        if self.saturation is not None and not self.saturation > self.intensity_floor:
            raise ValueError("saturation must exceed the intensity floor")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class ClassicalReadout:
    amplitude: float = 1.0
    phase_resolution: float = FOG_PHASE_RESOLUTION  # rad

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if not self.phase_resolution > 0:
            raise ValueError("phase_resolution must be positive")


def bin_spectrum(s: Spectrum, m: SpectrometerModel, rng=None) -> Spectrum:
    """Integrate ``s`` into contiguous spectrometer bins of width ``m.resolution``.

    Each input sample is treated as a pixel cell spanning the midpoints to its
    neighbours. Bins start at the first cell edge; a trailing partial bin is
    dropped. Bin values are mean intensities over the bin, then the detector
    floor and saturation are applied.
    """
    step = np.diff(s.wavelengths)
    if step.max() > m.resolution * (1 + 1e-9):
        raise GridCoarserThanResolution(
            f"grid step {step.max():.6g} nm is coarser than resolution {m.resolution:.6g} nm"
        )
    edges = s.cell_edges()
    cum = np.concatenate(([0.0], np.cumsum(s.intensities * np.diff(edges))))
    n_bins = int(math.floor((edges[-1] - edges[0]) / m.resolution + 1e-9))
    bin_edges = edges[0] + m.resolution * np.arange(n_bins + 1)
    bin_edges[-1] = min(bin_edges[-1], edges[-1])
    power = np.diff(np.interp(bin_edges, edges, cum))
    values = power / np.diff(bin_edges)
    if m.noise_sigma > 0:
        rng = np.random.default_rng() if rng is None else rng
        values = values + rng.normal(0.0, m.noise_sigma, values.size)
    values = np.where(values < m.intensity_floor, 0.0, values)
    values = np.clip(values, 0.0, m.saturation)
    centers = 0.5 * (bin_edges[1:] + bin_edges[:-1])
    return Spectrum(centers, values, s.probe)


def detection_limit(k: float, m: SpectrometerModel | float) -> float:
    """Smallest resolvable velocity (m/s) for sensitivity ``k`` in nm per m/s."""
    resolution = m.resolution if isinstance(m, SpectrometerModel) else float(m)
    if not k > 0:
        raise ValueError(f"sensitivity must be positive, got {k!r}")
    return resolution / k


def classical_velocity_limit(cfg: SagnacConfig, r: ClassicalReadout | float) -> float:
    """Velocity whose Sagnac phase equals the readout's phase resolution."""
    phi_min = r.phase_resolution if isinstance(r, ClassicalReadout) else float(r)
    return velocity_from_phase(cfg, phi_min)


def classical_intensity(amplitude: float, phi):
    """A (1 + cos phi) fringe intensity."""
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    return amplitude * (1 + np.cos(phi))
