"""Exception types.  Each maps to a CLI exit code."""


class ArtifactError(Exception):
    exit_code = 1


class ValidationError(ArtifactError, ValueError):
    """Malformed input or an unsupported request."""

    exit_code = 2


class UnsupportedModelError(ValidationError):
    pass


class NotCoalgebraMapError(ValidationError):
    pass


class CapOverflowError(ArtifactError):
    """A result would need filtration degree beyond the tracked cap."""

    exit_code = 3


class CrossCheckError(ArtifactError):
    """Two independent computations disagree; indicates a bug."""

    exit_code = 4


class AmbiguousWindowError(ArtifactError):
    """The growth data does not determine a cofinite type."""

    exit_code = 3
