"""Exception types raised across the package."""


class LandscapeError(ValueError):
    """Base class for all package errors."""


class ZeroVector(LandscapeError):
    """A kernel received a zero-norm vector."""


class DimensionMismatch(LandscapeError):
    """Array shapes disagree."""


class NonDifferentiablePoint(LandscapeError):
    """Some student neuron is (numerically) zero."""


class IndexOutOfRange(LandscapeError):
    """A neuron index is outside [0, n)."""


class InvalidSpec(LandscapeError):
    """A global-minimum specification is malformed."""


class InvalidParams(LandscapeError):
    """Probe parameters outside their admissible range."""


class AlphaOutOfRange(LandscapeError):
    """Split fraction outside the allowed interval."""


class NotSymmetric(LandscapeError):
    """Matrix fails the symmetry check."""


class TargetOutOfRange(LandscapeError):
    """Requested quadratic-form level lies outside the spectrum."""


class NotACriticalPoint(LandscapeError):
    """Gradient norm exceeds the criticality tolerance."""


class ConfigError(LandscapeError):
    """Invalid experiment configuration."""
