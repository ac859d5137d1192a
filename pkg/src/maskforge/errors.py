"""Shared exception types."""


class MaskforgeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MaskforgeError):
    pass


class ShapeMismatch(MaskforgeError):
    pass


class UserDigitsInvalid(MaskforgeError):
    pass


class NonIntegerFrequencies(MaskforgeError):
    pass


class NotDivisible(MaskforgeError):
    pass


class WrongCount(MaskforgeError):
    pass


class NotInClass(MaskforgeError):
    """A mask does not satisfy the sum-rule order required by an operation."""


class MethodDisagreement(MaskforgeError):
    """The two independent sum-rule checkers disagreed (implementation bug guard)."""


class InternalIdentityViolation(MaskforgeError):
    """An exactly-preserved polynomial identity failed mid-computation (bug guard)."""
