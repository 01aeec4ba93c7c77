"""Exception types shared across the package."""


class CCSSError(Exception):
    """Base class for all package errors."""


class EmptyMaskError(CCSSError):
    """The mask contains no object pixels (or preprocessing erased them all)."""


class DegenerateObjectError(CCSSError):
    """The object is too small to carry a usable boundary."""


class DegenerateSilhouetteError(CCSSError):
    """The silhouette has no usable horizontal extent."""


class SingularPointError(CCSSError):
    """Curve parameterization collapsed (near-zero speed at a sample)."""


class ScheduleMismatchError(CCSSError):
    """Two scale-space images were built on different smoothing schedules."""


class DatabaseFormatError(CCSSError):
    """Persisted database is missing, corrupt, or has an incompatible version."""


class EmptyDatabaseError(CCSSError):
    """A query was issued against a database with no models."""
