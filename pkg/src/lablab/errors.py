"""Exception hierarchy shared across the toolkit."""


class LablabError(Exception):
    """Base class for all toolkit errors."""


class EmptyListError(LablabError):
    """A betting rule was applied to an empty list."""


class BetOutOfRangeError(LablabError):
    """A bet fell outside [0, target]."""


class TerminationViolationError(LablabError):
    """A bet at length 1 or 2 was not the full target."""


class AlreadyTerminatedError(LablabError):
    """A step was attempted on a terminated system."""


class InvalidLengthError(LablabError):
    """A list length outside the valid domain."""


class InvalidConfigError(LablabError):
    """A run configuration is malformed; the message names the offending key."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class EmptySamplesError(LablabError):
    """An estimator received no samples."""


class CensoredRecordError(LablabError):
    """A censored episode was passed where a complete one is required."""


class DegenerateWeightsError(LablabError):
    """Importance weights collapsed below the effective-sample-size floor."""


class InsufficientGridError(LablabError):
    """A grid does not span enough points or decades for classification."""


class RhoAtLeastOneError(LablabError):
    """Tail asymptote requested for p <= 1/3, where it does not decay."""


class DivergentMeanError(LablabError):
    """The requested expectation is provably infinite."""


class PreconditionViolatedError(LablabError):
    """Closed-form inputs violate the stated preconditions."""
