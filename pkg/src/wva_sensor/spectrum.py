"""Probe spectra: synthesis, post-selection tilt, dispersion and center fitting.

Wavelengths are in nm throughout this module.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.optimize import least_squares

from .errors import FitDegenerate, GridTooNarrow, ShiftRegimeExceeded
from .polarization import WeakValueResult

DEFAULT_GRID_POINTS = 4096
GRID_HALF_SPAN = 4.0  # in units of W
MAX_TILT = 0.5  # bound on |8 pi Im(A_w) W / lambda0|

TILT_EQ12 = "eq12"
TILT_LITERAL = "literal"
TILT_CONVENTIONS = (TILT_EQ12, TILT_LITERAL)

CSV_HEADER = ("wavelength_nm", "intensity")


@dataclass(frozen=True)
class ProbeSpec:
    """Gaussian source I0 exp(-(lambda - lambda0)^2 / W^2)."""

    lambda0: float  # nm
    w: float  # nm
    i0: float = 1.0

    def __post_init__(self):
        for name in ("lambda0", "w", "i0"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")
        if self.w >= self.lambda0:
            raise ValueError("probe width must be smaller than its central wavelength")

    def default_grid(self, n: int = DEFAULT_GRID_POINTS, step: float | None = None) -> np.ndarray:
        """Uniform grid over lambda0 +/- 4W, by point count or by step."""
        half = GRID_HALF_SPAN * self.w
        if step is not None:
            n = int(math.ceil(2 * half / step)) + 1
            return self.lambda0 - half + step * np.arange(n)
        return np.linspace(self.lambda0 - half, self.lambda0 + half, n)


@dataclass(frozen=True, eq=False)
class Spectrum:
    wavelengths: np.ndarray
    intensities: np.ndarray
    probe: ProbeSpec | None = None

    def __post_init__(self):
        wl = np.array(self.wavelengths, dtype=float)
        it = np.array(self.intensities, dtype=float)
        if wl.ndim != 1 or wl.shape != it.shape:
            raise ValueError("wavelengths and intensities must be 1-D and of equal length")
        if wl.size < 2 or np.any(np.diff(wl) <= 0):
            raise ValueError("wavelength grid must be strictly increasing with >= 2 samples")
        if not np.all(np.isfinite(it)) or np.any(it < 0):
            raise ValueError("intensities must be finite and non-negative")
        wl.setflags(write=False)
        it.setflags(write=False)
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "intensities", it)

    def __len__(self):
        return self.wavelengths.size

    def cell_edges(self) -> np.ndarray:
        """Edges of the pixel cells represented by each sample (midpoints between samples)."""
        wl = self.wavelengths
        mid = 0.5 * (wl[1:] + wl[:-1])
        return np.concatenate(([wl[0] - (mid[0] - wl[0])], mid, [wl[-1] + (wl[-1] - mid[-1])]))

    def total_power(self) -> float:
        return float(np.sum(self.intensities * np.diff(self.cell_edges())))

    def is_uniform(self, rtol: float = 1e-6) -> bool:
        d = np.diff(self.wavelengths)
        return bool(np.all(np.abs(d - d.mean()) <= rtol * d.mean()))

    def to_csv(self, path=None) -> str:
        """Serialize as ``wavelength_nm,intensity`` rows; also writes ``path`` if given."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for w, i in zip(self.wavelengths.tolist(), self.intensities.tolist()):
            writer.writerow((repr(w), repr(i)))
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path, probe: ProbeSpec | None = None) -> Spectrum:
        return cls.from_csv_text(Path(path).read_text(encoding="utf-8"), probe)

    @classmethod
    def from_csv_text(cls, text: str, probe: ProbeSpec | None = None) -> Spectrum:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"expected CSV header {','.join(CSV_HEADER)!r}")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
        return cls(data[:, 0], data[:, 1], probe)


@dataclass(frozen=True)
class ShiftEstimate:
    delta_lambda0: float  # nm
    method: str  # "analytic" | "gaussian_fit" | "centroid"
    fit_residual: float = 0.0
    center: float | None = None  # absolute fitted center, nm
    width: float | None = None  # fitted W, nm

    def __post_init__(self):
        if self.method not in ("analytic", "gaussian_fit", "centroid"):
            raise ValueError(f"unknown shift method {self.method!r}")
        if not self.fit_residual >= 0:
            raise ValueError("fit_residual must be non-negative")
        if self.method == "analytic" and self.fit_residual != 0:
            raise ValueError("analytic estimates carry no fit residual")


def _check_span(spec: ProbeSpec, grid: np.ndarray):
    half = GRID_HALF_SPAN * spec.w
    slack = 1e-9 * spec.w
    if grid[0] > spec.lambda0 - half + slack or grid[-1] < spec.lambda0 + half - slack:
        raise GridTooNarrow(
            f"grid [{grid[0]:.6g}, {grid[-1]:.6g}] nm does not cover "
            f"lambda0 +/- 4W = [{spec.lambda0 - half:.6g}, {spec.lambda0 + half:.6g}] nm"
        )


def _gaussian(x, center, width, amp):
    return amp * np.exp(-(((x - center) / width) ** 2))


def initial_spectrum(spec: ProbeSpec, grid=None) -> Spectrum:
    grid = spec.default_grid() if grid is None else np.asarray(grid, dtype=float)
    _check_span(spec, grid)
    return Spectrum(grid, _gaussian(grid, spec.lambda0, spec.w, spec.i0), spec)


def shift_per_im_weak_value(spec: ProbeSpec) -> float:
    """d(delta lambda0)/d(Im A_w) in nm: -4 pi W^2 / lambda0."""
    return -4 * math.pi * spec.w**2 / spec.lambda0


def analytic_shift(spec: ProbeSpec, im_a_w: float) -> ShiftEstimate:
    return ShiftEstimate(shift_per_im_weak_value(spec) * im_a_w, "analytic", 0.0)


def tilt_strength(spec: ProbeSpec, im_a_w: float) -> float:
    """Dimensionless tilt |8 pi Im(A_w) W / lambda0|; must stay <= MAX_TILT."""
    return abs(8 * math.pi * im_a_w * spec.w / spec.lambda0)


def postselected_spectrum(
    spec: ProbeSpec, wv: WeakValueResult, grid=None, convention: str = TILT_EQ12
) -> Spectrum:
    """Initial spectrum scaled by p_postselect and tilted by the weak value.

    ``eq12`` applies exp(-8 pi Im(A_w) (lambda - lambda0) / lambda0), which
    moves the Gaussian center by exactly the analytic shift. ``literal``
    applies the momentum-space factor exp(2 p g Im(A_w)) with p = 2 pi / lambda
    and g = lambda0, and moves the center by about half as much.
    """
    if convention not in TILT_CONVENTIONS:
        raise ValueError(f"unknown tilt convention {convention!r}")
    strength = tilt_strength(spec, wv.im_a_w)
    if strength > MAX_TILT:
        raise ShiftRegimeExceeded(
            f"tilt |8 pi Im(A_w) W / lambda0| = {strength:.4g} exceeds {MAX_TILT}"
        )
    base = initial_spectrum(spec, grid)
    x = base.wavelengths
    if convention == TILT_EQ12:
        tilt = np.exp(-8 * math.pi * wv.im_a_w * (x - spec.lambda0) / spec.lambda0)
    else:
        tilt = np.exp(4 * math.pi * wv.im_a_w * spec.lambda0 / x)
    return Spectrum(x, wv.p_postselect * tilt * base.intensities, spec)


def fit_center(s: Spectrum, reference: float | None = None) -> ShiftEstimate:
    """Least-squares Gaussian fit of the spectral peak.

    A weighted quadratic fit to log-intensity over samples above peak/e^2 seeds
    a nonlinear refinement on the same samples. ``delta_lambda0`` is measured
    from ``reference``, defaulting to the probe's lambda0 (or 0 without one).
    """
    if reference is None:
        reference = s.probe.lambda0 if s.probe is not None else 0.0
    x, y = s.wavelengths, s.intensities
    if len(s) < 16:
        raise FitDegenerate(f"need at least 16 samples, got {len(s)}")
    peak_idx = int(np.argmax(y))
    peak = y[peak_idx]
    if peak <= 0:
        raise FitDegenerate("spectrum is identically zero")
    if peak_idx == 0 or peak_idx == len(s) - 1:
        raise FitDegenerate("spectral peak touches the grid boundary")

    sel = y > peak * math.exp(-2.0)
    xs, ys = x[sel], y[sel]
    if xs.size < 3:
        raise FitDegenerate("too few samples above peak/e^2")
    x_ref = x[peak_idx]
    u = xs - x_ref
    scale = max(np.ptp(u), np.min(np.diff(x))) / 2
    a, b, c = np.polyfit(u / scale, np.log(ys / peak), 2, w=ys / peak)
    if not a < 0:
        raise FitDegenerate("log-intensity is not concave around the peak")
    center0 = -b / (2 * a) * scale
    width0 = scale / math.sqrt(-a)
    amp0 = peak * math.exp(c - b * b / (4 * a))

    yn = ys / peak

    def resid(p):
        return _gaussian(u, p[0] * width0, p[1] * width0, p[2]) - yn

    def jac(p):
        d = (u - p[0] * width0) / (p[1] * width0)
        g = np.exp(-d * d)
        return np.column_stack((2 * p[2] * g * d / p[1], 2 * p[2] * g * d * d / p[1], g))

    sol = least_squares(
        resid,
        x0=[center0 / width0, 1.0, amp0 / peak],
        jac=jac,
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    center = x_ref + sol.x[0] * width0
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return ShiftEstimate(
        delta_lambda0=float(center - reference),
        method="gaussian_fit",
        fit_residual=rms,
        center=float(center),
        width=float(abs(sol.x[1]) * width0),
    )


def centroid_center(s: Spectrum, reference: float | None = None) -> ShiftEstimate:
    """Intensity-weighted mean wavelength (first moment)."""
    if reference is None:
        reference = s.probe.lambda0 if s.probe is not None else 0.0
    weights = s.intensities * np.diff(s.cell_edges())
    total = weights.sum()
    if total <= 0:
        raise FitDegenerate("spectrum is identically zero")
    center = float(np.sum(weights * s.wavelengths) / total)
    return ShiftEstimate(center - reference, "centroid", 0.0, center=center)


def apply_symmetric_dispersion(s: Spectrum, broadening: float) -> Spectrum:
    """Broaden with the symmetric kernel exp(-x^2 / broadening^2).

    A Gaussian of width W comes out with width sqrt(W^2 + broadening^2) and
    the same center. Requires a uniform wavelength grid.
    """
    if not (broadening >= 0 and math.isfinite(broadening)):
        raise ValueError(f"broadening must be non-negative, got {broadening!r}")
    if broadening == 0:
        return s
    if not s.is_uniform():
        raise ValueError("symmetric dispersion requires a uniform wavelength grid")
    step = float(np.mean(np.diff(s.wavelengths)))
    sigma = broadening / math.sqrt(2) / step
    out = gaussian_filter1d(s.intensities, sigma, mode="constant", cval=0.0, truncate=6.0)
    return Spectrum(s.wavelengths, np.clip(out, 0.0, None), s.probe)
