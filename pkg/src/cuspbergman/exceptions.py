"""Exception types raised across the package."""


class InvalidPointError(ValueError):
    pass


class IterationLimitError(RuntimeError):
    pass


class StepTooLargeError(ValueError):
    pass


class BoxTooLargeError(ValueError):
    pass


class CapExceededError(ValueError):
    pass


class EmptyOrbitError(RuntimeError):
    pass


class HypothesisViolationError(ValueError):
    """Raised when a bound is evaluated outside the range where it was derived."""


class DivergenceError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class TailTooLargeError(ValueError):
    """The truncation order of a q-expansion is too small for the requested height."""


class ToleranceNotMetError(RuntimeError):
    pass


class GramNotPositiveDefiniteError(RuntimeError):
    pass


class BoxOutsideDomainError(ValueError):
    pass
