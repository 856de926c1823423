"""
Exception hierarchy shared by every app.

Numerical code raises these; the management commands translate them into
exit codes (see apps.experiments.management.base).
"""


class LZError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(LZError, ValueError):
    """A parameter or precondition is outside the domain of an operation."""


class UnknownFamilyError(LZError, KeyError):
    def __init__(self, name, registered):
        self.name = name
        self.registered = tuple(registered)
        super().__init__(f"Unknown model '{name}'. Registered models: {', '.join(self.registered)}")

    def __str__(self):
        return self.args[0]


class UnsupportedFamilyError(LZError):
    """The family lacks a commuting partner or analytic derivatives."""


class StepSizeUnderflow(LZError, ArithmeticError):
    def __init__(self, location, step):
        self.location = location
        self.step = step
        super().__init__(f"Step size underflow at s={location!r} (step {step:.3e})")


class UnitarityError(LZError):
    def __init__(self, defect, bound):
        self.defect = defect
        self.bound = bound
        super().__init__(f"Unitarity defect {defect:.3e} exceeds {bound:.1e}")


class ConvergenceError(LZError, RuntimeError):
    def __init__(self, message, values=()):
        self.values = list(values)
        if self.values:
            message = f"{message}; finite-T values: {self.values}"
        super().__init__(message)


class DataError(LZError, ValueError):
    """Measured data cannot be used for a fit."""
