"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PdmError(Exception):
    """Base class for every error raised by this package."""


class MissingParameter(PdmError):
    """A family requires a parameter that was not supplied."""

    def __init__(self, field: str, message: str | None = None):
        self.field = field
        super().__init__(message or f"missing parameter: {field}")


class InvalidParameter(PdmError):
    """A supplied parameter is outside its admissible range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainViolation(PdmError):
    """A position left the open interval where the mass stays positive."""

    def __init__(self, message: str, t: float | None = None,
                 coordinate: int | None = None):
        self.t = t
        self.coordinate = coordinate
        super().__init__(message)


class SingularPoint(PdmError):
    """Evaluation at a point where a potential term diverges (x = 0)."""

    def __init__(self, message: str, coordinate: int | None = None):
        self.coordinate = coordinate
        super().__init__(message)


class SingularCoefficient(PdmError):
    """An equation-of-motion coefficient diverges at this state."""

    def __init__(self, message: str, coordinate: int | None = None):
        self.coordinate = coordinate
        super().__init__(message)


class NonPositiveScale(PdmError):
    """The time-rescaling factor f dropped to zero or below along a path."""


class NoPeriod(PdmError):
    """A trajectory does not contain a measurable oscillation period."""


class InvalidSpec(PdmError):
    """A closed-form solution specification violates its constraints."""


class UnsupportedFamily(PdmError):
    """The requested operation has no closed form for this family."""


class UnknownCheck(PdmError):
    """run_check was asked for a name that is not registered."""


class ExprError(PdmError):
    """Base class for expression parsing/evaluation errors."""


class ExprSyntaxError(ExprError):
    """Malformed expression text; ``position`` is a 1-based column."""

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"syntax error at column {position}: expected {expected}")


class UnknownIdentifier(ExprError):
    """An identifier that is neither an allowed variable nor a function."""

    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier '{name}' at column {position}")


class ExprDomainError(ExprError):
    """Evaluation hit a singular point (log/sqrt of a negative, 1/0)."""

    def __init__(self, message: str, subexpression: str):
        self.subexpression = subexpression
        super().__init__(f"{message} in '{subexpression}'")
