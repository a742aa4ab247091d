"""Exception types shared across the package."""


class AdmissibilityError(ValueError):
    """Principal curvatures of the reference data left the open interval (-1, 1)."""

    def __init__(self, message, lambda0=None, location=None):
        super().__init__(message)
        self.lambda0 = lambda0
        self.location = location


class SolverError(RuntimeError):
    """An iterative solve failed to reach its tolerance."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class BlowupError(RuntimeError):
    """The flow produced non-finite values."""

    def __init__(self, message, t, trace=None):
        super().__init__(message)
        self.t = t
        self.trace = trace


class FieldFormatError(OSError):
    """A field file did not match the expected header or payload size."""
