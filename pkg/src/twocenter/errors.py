"""Exception hierarchy shared by all modules."""


class TwoCenterError(Exception):
    """Base class for every error raised by :mod:`twocenter`."""


class SingularCenter(TwoCenterError):
    """A state lies on (or numerically at) one of the fixed centers."""


class DegenerateParameter(TwoCenterError):
    """The parameter ``a`` sits at a degenerate transition (``a == 1``)."""


class DomainError(TwoCenterError, ValueError):
    """An argument is outside the domain of the operation."""


class StepSizeUnderflow(TwoCenterError):
    """The adaptive step controller stalled."""


class EmptyRegion(TwoCenterError):
    """The accessible region on the section is empty at the requested energy."""


class RejectionStall(TwoCenterError):
    """Rejection sampling acceptance rate fell below the floor."""


class ResonantParameter(TwoCenterError):
    """``a = sqrt(N**2 + 1)``: the first averaged function vanishes identically."""


class InvalidBranch(TwoCenterError):
    """A closed-form zero has no real positive amplitude."""


class SingularShooting(TwoCenterError):
    """The shooting Jacobian lost rank beyond the gauged directions."""


class NoConvergence(TwoCenterError):
    """Newton shooting did not converge.

    The best iterate is kept on the exception so callers can inspect it.
    """

    def __init__(self, message, ic=None, period=None, closure=None):
        super().__init__(message)
        self.ic = ic
        self.period = period
        self.closure = closure


class InsufficientEvidence(TwoCenterError):
    """No monodromy report meets the closure precondition."""
