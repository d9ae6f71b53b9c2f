"""Exception hierarchy shared by every fraccalc module.

Anything derived from ValidationError is a problem with the caller's input
(CLI exit status 2); NumericalFailure means the numbers themselves went bad
(CLI exit status 3).
"""


class FracCalcError(Exception):
    pass


class ValidationError(FracCalcError, ValueError):
    pass


class DomainError(ValidationError):
    pass


class PoleError(DomainError):
    pass


class OutOfDomainError(ValidationError):
    pass


class GridMismatchError(ValidationError):
    pass


class InsufficientClearanceError(ValidationError):
    pass


class DerivativeUnavailableError(ValidationError):
    pass


class PathDomainError(ValidationError):
    pass


class SingularCoefficientError(ValidationError):
    pass


class StepSizeError(ValidationError):
    pass


class NoClosedFormError(ValidationError):
    pass


class NumericalFailure(FracCalcError, ArithmeticError):
    pass


class GammaOverflowError(NumericalFailure, OverflowError):
    pass


class NonFiniteStateError(NumericalFailure):
    pass
