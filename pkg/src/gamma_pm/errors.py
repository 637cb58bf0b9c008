"""Exception hierarchy shared by every gamma_pm module."""


class GammaPMError(Exception):
    """Base class for all library errors."""


class DomainError(GammaPMError, ValueError):
    """A parameter lies outside its admissible range."""


class DivergenceError(GammaPMError):
    """A limiting sequence failed to settle within tolerance."""


class ConvergenceError(GammaPMError):
    """An iterative solver stopped before reaching its tolerance."""


class ResolutionError(GammaPMError, ValueError):
    """The grid is too coarse for the requested transition layer."""


class GeometryError(GammaPMError):
    """A geometric query hit a degenerate configuration."""


class DegenerateSliceError(GeometryError):
    """A slicing line runs along an edge of the partition."""


class ZeroMeasureError(GammaPMError):
    """A vector measure vanishes where a direction is required."""


class CoverageError(GammaPMError):
    """A partition family leaves an atom uncovered."""


class StiffnessError(GammaPMError):
    """Adaptive time stepping underflowed dt_min."""
