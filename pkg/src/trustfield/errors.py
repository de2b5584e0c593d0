"""Exception types shared across the package."""


class TrustFieldError(Exception):
    """Base class for all trustfield errors."""


class EmptyCommunityError(TrustFieldError):
    """An operation that needs at least one community member got none."""


class MissingCenterReadingError(TrustFieldError):
    """A voting average was requested for a center node with no reading."""


class RejectionSamplingError(TrustFieldError):
    """Truncated-noise rejection sampling hit its defensive draw cap.

    Only reachable with pathological process variance; signals a
    misconfigured model rather than a recoverable condition.
    """


class InvalidConfigError(TrustFieldError):
    """A scenario configuration violates a structural constraint."""


class LengthMismatchError(TrustFieldError):
    """Indicator and ground-truth vectors have different lengths."""
