"""Exception types shared across the package."""


class OptevoError(Exception):
    """Base class for all package errors."""


class TruncationError(OptevoError):
    """State support does not fit in the requested Fock truncation."""


class ParameterBoundError(OptevoError):
    """A physical parameter lies outside its allowed range."""


class NormalizationError(OptevoError):
    """An operation that requires a unit-norm state received one that is not."""


class ZeroStateError(OptevoError):
    """A projection or normalization annihilated the state."""


class DimensionError(OptevoError):
    """Mode truncations are incompatible for the requested operation."""


class InvalidDensityMatrix(OptevoError):
    """Matrix is not Hermitian/positive/trace-one within tolerance."""


class ZeroPhotonError(OptevoError):
    """Figure of merit undefined for a zero-photon probe."""


class DegeneratePosteriorError(OptevoError):
    """Observed outcome has zero likelihood at every grid phase."""


class UsageError(OptevoError):
    """Bad command-line arguments or configuration."""
