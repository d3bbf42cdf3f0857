"""Exception hierarchy shared by all groupft modules."""


class GroupFTError(Exception):
    """Base class for groupft errors."""


class ZeroFieldError(GroupFTError):
    """Raised when an operation requires a nonzero field."""


class MomentDivergenceError(GroupFTError):
    """A moment integral has too much mass in the boundary cells to be trusted."""


class AliasingError(GroupFTError):
    """An evaluation point or truncation would alias on the current grid."""


class DecayError(GroupFTError):
    """A field violates the boundary-decay requirement of a quadrature step."""


class SpectralTailError(GroupFTError):
    """Spectral mass beyond the quadrature cutoff exceeds its budget."""


class SingularBandError(GroupFTError):
    """Spectral mass inside the excluded singular band exceeds its budget."""

    def __init__(self, message, excluded_mass=None):
        super().__init__(message)
        self.excluded_mass = excluded_mass


class IllConditionedError(GroupFTError):
    """A rank decision sits too close to the numerical threshold to be trusted."""


class UsageError(GroupFTError):
    """Invalid configuration or arguments, detected before any computation."""
