"""Weak-value-amplified fiber-optic linear velocity sensor: simulation and design."""
from .design import (
    DesignConstraints,
    DesignRecommendation,
    SensorConfig,
    SweepResult,
    paper_config,
    recommend_design,
    simulate_point,
    small_signal_k,
    sweep_beta_velocity,
)
from .errors import (
    ConfigError,
    DegeneratePostselection,
    FitDegenerate,
    GridCoarserThanResolution,
    GridTooNarrow,
    RegimeViolation,
    ShiftRegimeExceeded,
)
from .instrument import (
    ClassicalReadout,
    SpectrometerModel,
    bin_spectrum,
    classical_intensity,
    classical_velocity_limit,
    detection_limit,
)
from .polarization import (
    Observable2,
    PolarizationState,
    WeakValueResult,
    postselect,
    preselect,
    weak_value_closed_form,
    weak_value_raw,
)
from .sagnac import LoopGeometry, PathSegment, SagnacConfig, phase_from_path, phase_from_velocity
from .spectrum import (
    ProbeSpec,
    ShiftEstimate,
    Spectrum,
    analytic_shift,
    apply_symmetric_dispersion,
    fit_center,
    initial_spectrum,
    postselected_spectrum,
)

__version__ = "0.1.0"
