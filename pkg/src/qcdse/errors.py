"""Exception hierarchy shared by every module."""


class QcdseError(Exception):
    """Base class for all package errors."""


class DomainError(QcdseError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class CatalogError(QcdseError, ValueError):
    """A technology catalog document could not be loaded."""


class ConfigError(QcdseError, ValueError):
    """A run configuration or constraint definition is invalid."""


class EvaluationError(QcdseError):
    """A sweep cell failed to evaluate; carries the cell coordinates."""

    def __init__(self, message, coordinates=None):
        super().__init__(message)
        self.coordinates = coordinates
