"""Exception types raised across the package."""


class WvaError(Exception):
    """Base class for all package errors."""


class DegeneratePostselection(WvaError, ValueError):
    """Pre- and post-selected states are (numerically) orthogonal."""


class GridTooNarrow(WvaError, ValueError):
    pass


class ShiftRegimeExceeded(WvaError, ValueError):
    """Spectral tilt too strong for the first-order shift relation to hold."""


class FitDegenerate(WvaError, ValueError):
    pass


class GridCoarserThanResolution(WvaError, ValueError):
    pass


class RegimeViolation(WvaError, ValueError):
    """One or more (beta, velocity) sweep points lie outside the small-signal regime."""

    def __init__(self, pairs, message=None):
        self.pairs = list(pairs)
        if message is None:
            shown = ", ".join(f"(beta={b:.6g}, v={v:.6g})" for b, v in self.pairs[:10])
            more = "" if len(self.pairs) <= 10 else f" ... (+{len(self.pairs) - 10} more)"
            message = f"{len(self.pairs)} sweep point(s) outside the small-signal regime: {shown}{more}"
        super().__init__(message)


class ConfigError(WvaError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
