"""Exception types shared across the package.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalError` to exit code 2.
"""


class ValidationError(ValueError):
    """Bad input: schema, value range, or an incompatible configuration."""


class SchemaError(ValidationError):
    pass


class UnusableSplitError(ValidationError):
    pass


class IncompatibleMeasureError(ValidationError):
    """A measure was requested for a prediction type the model cannot produce."""


class NumericalError(ArithmeticError):
    """An estimator failed to produce a usable numerical result."""


class ConvergenceError(NumericalError):
    def __init__(self, message, beta=None, grad_norm=None):
        super().__init__(message)
        self.beta = beta
        self.grad_norm = grad_norm


class SeparationError(NumericalError):
    def __init__(self, message, beta=None):
        super().__init__(message)
        self.beta = beta


class NoComparablePairsError(NumericalError):
    pass
