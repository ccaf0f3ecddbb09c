"""Exception hierarchy shared by every gridcut module."""


class GridcutError(Exception):
    """Base class for all gridcut errors."""


class ParseError(GridcutError, ValueError):
    """Malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(GridcutError, ValueError):
    """Structurally valid input that violates a model invariant."""


class InfeasibleError(GridcutError):
    """Every node is contracted into the reference: no hidden attack exists."""


class DisconnectedError(GridcutError):
    """The attack graph is disconnected (the measurement matrix is rank deficient)."""


class RankError(GridcutError):
    """Measurement matrix lacks full column rank."""


class VerificationFailure(GridcutError):
    def __init__(self, message, trial=None):
        self.trial = trial
        super().__init__(message)


class TooLargeError(GridcutError):
    """Exhaustive search requested on an instance beyond its size limit."""


class LpInfeasible(GridcutError):
    pass


class ExhaustedError(GridcutError):
    """Raised by strict planners when full protection arrives before k steps."""
