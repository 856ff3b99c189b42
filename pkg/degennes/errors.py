"""Exception hierarchy for degennes.

Every error carries the process exit code the CLI reports for it:
4 for invalid input, 3 for numerical non-convergence, 2 for failed checks.
"""
from __future__ import annotations


class DeGennesError(Exception):
    exit_code: int = 1


class ConfigInvalid(DeGennesError, ValueError):
    exit_code = 4


class ConstraintViolated(DeGennesError, ValueError):
    """Raised when a window or hypothesis inequality fails.

    `constraint` holds the name of the failed inequality, e.g. "beta > 2·alpha".
    """

    exit_code = 4

    def __init__(self, constraint: str, detail: str = "") -> None:
        self.constraint = constraint
        message = f"ConstraintViolated({constraint!r})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class EnergyOutOfRange(DeGennesError, ValueError):
    exit_code = 4


class WindowEmpty(DeGennesError, ValueError):
    exit_code = 4


class StepUnderflow(DeGennesError, ValueError):
    exit_code = 4


class NotConverged(DeGennesError, RuntimeError):
    exit_code = 3


class TruncationDominated(DeGennesError, RuntimeError):
    exit_code = 3


class FitUnstable(DeGennesError, RuntimeError):
    exit_code = 3


class NoBracket(DeGennesError, RuntimeError):
    exit_code = 2
