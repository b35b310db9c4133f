"""Exception hierarchy for covarkit."""


class CovarKitError(Exception):
    """Base class for all toolkit errors."""


class ExprClassOverflow(CovarKitError):
    """Result would leave the closed-form expression class.

    Raised instead of approximating; callers either give up symbolically
    (Unknown verdict) or fall back to the numeric oracle.
    """


class DegenerateAllFixed(CovarKitError):
    """F(z) = z identically, so every real number is a fixed point."""


class NotContinuous(CovarKitError):
    """A C[alpha, beta] criterion received a discontinuous expression."""

    def __init__(self, message: str, point: float = None):
        super().__init__(message)
        self.point = point


class WindowTooSmall(CovarKitError):
    """The declared window does not contain what the oracle must evaluate."""


class UnsupportedFamily(CovarKitError):
    """Free parameters enter a family in a way the search cannot reduce."""


class ProblemFormatError(CovarKitError):
    """A problem file could not be parsed."""


class ValidationError(CovarKitError):
    """A parsed problem violates an operator invariant."""


# Process exit codes
EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_UNKNOWN = 2
EXIT_INCONSISTENT = 3
EXIT_BAD_INPUT = 64
EXIT_WINDOW_TOO_SMALL = 65
EXIT_UNSUPPORTED_FAMILY = 66


def exit_code_for_error(error: Exception) -> int:
    """Exit code for an error raised while handling a problem file."""
    if isinstance(error, WindowTooSmall):
        return EXIT_WINDOW_TOO_SMALL
    if isinstance(error, UnsupportedFamily):
        return EXIT_UNSUPPORTED_FAMILY
    if isinstance(error, (ProblemFormatError, ValidationError, NotContinuous, ValueError)):
        return EXIT_BAD_INPUT
    return EXIT_INCONSISTENT
