"""Exception hierarchy.

The CLI maps :class:`InputError` to exit code 3 and :class:`NumericalError`
to exit code 2; everything else numerical in the package raises one of these.
"""


class IsoblockError(Exception):
    pass


class InputError(IsoblockError):
    """Malformed user input: bad expressions, regions, catalog names."""


class ParseError(InputError):
    def __init__(self, message, position=None, source=None):
        self.position = position
        self.source = source
        if position is not None:
            message = f"{message} at position {position}"
            if source is not None:
                message += f"\n  {source}\n  {' ' * position}^"
        super().__init__(message)


class NumericalError(IsoblockError):
    """A computation could not be completed reliably."""


class DomainError(NumericalError):
    def __init__(self, message, subexpression=None):
        self.subexpression = subexpression
        if subexpression is not None:
            message = f"{message} in '{subexpression}'"
        super().__init__(message)


class IntegrationError(NumericalError):
    def __init__(self, message, t=None, state=None):
        self.t = t
        self.state = state
        if t is not None:
            message = f"{message} (t={t:.6g}, state={state})"
        super().__init__(message)


class BoundaryZeroError(NumericalError):
    """The field (nearly) vanishes on the boundary of the region."""

    def __init__(self, message, point=None, magnitude=None):
        self.point = point
        self.magnitude = magnitude
        super().__init__(message)


class DegenerateZeroError(NumericalError):
    def __init__(self, message, point=None, det=None):
        self.point = point
        self.det = det
        super().__init__(message)


class ConvergenceError(NumericalError):
    pass


class CrossValidationError(NumericalError):
    pass
