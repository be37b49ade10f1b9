"""Exceptions raised by the shooting and profile machinery."""


class ProfileError(Exception):
    """Base class for all package errors."""


class DomainError(ProfileError, ValueError):
    """Input outside the range where the model is defined (e.g. d < 3)."""


class BudgetExceeded(ProfileError):
    """The integrator hit ``max_steps`` before the stop rule fired."""


class StepUnderflow(ProfileError):
    """The adaptive step size collapsed below machine resolution."""


class AmbiguousNearCritical(ProfileError):
    """First interior minimum is too close to zero to trust the P/N label."""

    def __init__(self, a, r_min, u_min):
        super().__init__(
            f"a={a!r}: first minimum u({r_min!r})={u_min!r} is below the "
            "classification threshold"
        )
        self.a = a
        self.r_min = r_min
        self.u_min = u_min


class InvalidBracket(ProfileError):
    """Bracket endpoints do not straddle the critical height."""


class NotCrossing(ProfileError):
    """The trajectory stays positive, so R(a) does not exist."""


class MultipleThetaZeros(ProfileError):
    """More than one sensitivity zero before R(a): tolerance failure."""


class InconsistentDimension(ProfileError):
    """Objects computed at different dimensions were combined."""


class TimeOutOfRange(ProfileError, ValueError):
    """Evaluation time not in [0, T)."""
