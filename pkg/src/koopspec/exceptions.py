"""Exception types shared across the package.

The CLI maps ``ConfigError`` (and argparse usage errors) to exit code 2 and
every other ``KoopspecError`` to exit code 1.
"""


class KoopspecError(Exception):
    """Base class for all domain errors raised by koopspec."""


class ContractViolation(KoopspecError, ValueError):
    """An operation was called with inputs that violate its contract."""


class NotPositiveSemidefinite(KoopspecError):
    """Cholesky factorization failed for every jitter in the schedule."""


class DegeneratePencil(KoopspecError):
    """The right-hand matrix of a generalized eigenproblem is numerically singular."""


class InsufficientRank(KoopspecError):
    """The requested estimator rank exceeds the numerical rank of the data."""

    def __init__(self, requested, achievable, detail=""):
        self.requested = requested
        self.achievable = achievable
        msg = f"requested rank {requested}, achievable rank {achievable}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UnsupportedMethod(KoopspecError):
    """The diagnostic is not defined for the model's regression method."""


class TrajectoryBlowUp(KoopspecError):
    """An integrated trajectory left the stability region."""


class TrajectoryParseError(KoopspecError):
    """A trajectory CSV file could not be parsed."""


class DiscretizationError(KoopspecError):
    """A generator discretization failed its quality check."""


class ConfigError(KoopspecError):
    """A config file is missing, malformed, or contains invalid keys."""
