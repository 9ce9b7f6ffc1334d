"""Exception types shared across the package."""

from __future__ import annotations


class UpcrossError(Exception):
    """Base class for all errors raised by upcross."""


class ModelMismatchError(UpcrossError, ValueError):
    """Elements or objects belong to different group models."""


class WindowError(UpcrossError, LookupError):
    """An operation would inspect group elements outside the tabulated window."""


class PreconditionError(UpcrossError, ValueError):
    """A documented precondition of an algorithm does not hold.

    ``failed`` lists every clause that was violated, not just the first.
    """

    def __init__(self, message: str, failed: list[str] | None = None):
        self.failed = list(failed or [])
        if self.failed:
            message = f"{message}: " + "; ".join(self.failed)
        super().__init__(message)


class DisjointnessError(PreconditionError):
    """A ball collection that must be pairwise disjoint is not."""


class InsufficientDataError(UpcrossError, ValueError):
    """Not enough positive observations to fit a model."""


class ConfigError(UpcrossError, ValueError):
    """Experiment configuration is invalid.

    ``violations`` is a list of ``(key_path, message)`` pairs.
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = list(violations)
        lines = [f"{path}: {msg}" for path, msg in self.violations]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


class GuaranteeError(UpcrossError, ArithmeticError):
    """A bound that should hold under verified hypotheses failed on a concrete instance."""


class UncertifiedWarning(UserWarning):
    """A guarantee is not asserted because a threshold could not be verified."""
