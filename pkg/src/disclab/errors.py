"""Exception types shared across the package."""


class DisclabError(Exception):
    """Base class for all package errors."""


class ParameterError(DisclabError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class StructuralError(DisclabError):
    """Containers that must share a grid or dimension do not."""


class SingularityError(DisclabError):
    """A kernel piece was requested exactly on its singular set."""


class GeometryError(DisclabError):
    """A tube configuration cannot be realised."""


class FitError(DisclabError):
    """Not enough usable data for a regression."""


class ComparisonError(DisclabError):
    """Two reports cannot be compared."""
