"""Exception hierarchy shared by all uqueue modules."""


class UqueueError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(UqueueError):
    """Bad input: parameters, configuration, or preconditions violated."""


class NumericalError(UqueueError):
    """A numerical procedure failed or produced an invalid result."""
