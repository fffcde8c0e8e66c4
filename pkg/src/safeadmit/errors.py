"""Exception types raised across the package."""


class SafeAdmitError(Exception):
    """Base class for all package errors."""


class SingularInertia(SafeAdmitError):
    pass


class NonInvertibleMass(SafeAdmitError):
    pass


class NotHurwitz(SafeAdmitError):
    pass


class StructureMismatch(SafeAdmitError):
    pass


class NoCommonP(SafeAdmitError):
    def __init__(self, message, best_margin=float("nan")):
        super().__init__(message)
        self.best_margin = best_margin


class Underdamped(SafeAdmitError):
    pass


class ConditionViolated(SafeAdmitError):
    """Raised when the stiff subsystem cannot dominate the force bound on the boundary."""

    def __init__(self, message, axis=None, margin=None):
        super().__init__(message)
        self.axis = axis
        self.margin = margin


class ConfigRejected(SafeAdmitError):
    pass


class NumericalDivergence(SafeAdmitError):
    pass
