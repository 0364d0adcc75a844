class TailRiskError(Exception):
    """Base class for errors raised by this package."""


class InputError(TailRiskError, ValueError):
    """Invalid or inconsistent input data or parameters."""


class EstimationError(TailRiskError, RuntimeError):
    """A numerical procedure failed on otherwise valid input."""
