"""Exception types shared across the package."""


class EngineError(Exception):
    """Base class for all solver and analysis failures."""


class DimensionMismatch(EngineError):
    """Operator or state dimensions are incompatible."""


class NonUniqueSteadyState(EngineError):
    """The generator has more than one stationary state."""


class SolverFailure(EngineError):
    """A linear solve broke down numerically."""


class StepUnderflow(EngineError):
    """The adaptive integrator could not meet its error tolerance."""


class DegenerateDetuning(EngineError):
    """Probe frequency coincides with the pump carrier; the first-harmonic
    resolvent is singular along the stationary direction."""


class HarmonicTruncationNotConverged(EngineError):
    """Raising the Fourier cutoff kept changing the reflection coefficient."""


class NoPeak(EngineError):
    """Trace shows no amplification peak above the unit baseline."""


class NoCrossing(EngineError):
    """Two sideband branches do not intersect in the given power range."""


class NoMinimum(EngineError):
    """Saturation data are monotone; no reflection minimum to locate."""


class DegenerateCircle(EngineError):
    """Reflection trace collapses to a point; no resonance circle to fit."""


class PoorFit(EngineError):
    """Fit converged but the residual exceeds the acceptance threshold."""


class ConfigError(EngineError):
    """Run configuration is missing, malformed, or carries unknown keys."""
