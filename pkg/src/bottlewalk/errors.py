"""Exception types shared across the package."""


class BottlewalkError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(BottlewalkError):
    """Malformed experiment configuration (unknown key, bad value, ...)."""


class DisconnectedGraphError(BottlewalkError):
    """The graph is not connected."""


class MissingMarkError(BottlewalkError):
    """A required marked vertex (origin, gateway, far start, boundary) is absent."""


class BottleneckNotSeparatingError(BottlewalkError):
    """Removing the bottleneck vertices does not separate the core from the far region."""


class SizeBudgetError(BottlewalkError):
    """A construction would exceed the configured vertex budget."""


class ExactBudgetError(BottlewalkError):
    """The graph is too large for an exact (dense) computation."""


class SingularSystemError(BottlewalkError):
    """A hitting-time linear system could not be solved reliably."""


class DimensionMismatchError(BottlewalkError):
    """Distribution vectors with incompatible shapes."""


class HorizonTooShortError(BottlewalkError):
    """A mixing profile never reached the requested threshold.

    Carries ``d_end``, the distance at the final computed step.
    """

    def __init__(self, message, d_end=None):
        super().__init__(message)
        self.d_end = d_end


class EmptySubsetError(BottlewalkError):
    """An operation received an empty vertex subset."""


class FullSubsetError(BottlewalkError):
    """An operation received a subset equal to the whole vertex set."""


class StepBudgetError(BottlewalkError):
    """A sampled trajectory exhausted its step budget."""


class PhiRangeError(BottlewalkError):
    """The leakage product phi is outside the usable range (must be < 1)."""


class EpsilonRangeError(BottlewalkError):
    """epsilon is incompatible with the stationary mass of the slow set."""


class MissingInputError(BottlewalkError):
    """A report field required by the requested check was not supplied."""


class PeriodicNoConvergenceWarning(UserWarning):
    """A non-lazy profile showed no TV decay; the walk may be periodic."""
