"""Exception types shared across the package."""


class LinampError(Exception):
    """Base class for package errors."""


class TruncationOverflowError(LinampError):
    """Channel output leaked past the Fock truncation beyond tolerance."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ExtentMismatchError(LinampError):
    """Requested evaluation point lies outside the sampled grid."""


class InsufficientMomentsError(LinampError):
    """A moment sequence is too short for the requested Hankel order."""


class ConfigError(LinampError):
    """Run configuration failed to parse or validate."""
