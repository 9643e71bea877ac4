"""Exception types shared across the package.

The CLI maps these onto its exit-status contract: config problems
exit 2, precondition violations exit 3, enumeration guards exit 4.
"""

from __future__ import annotations


class SpaceMismatchError(ValueError):
    """Two operands live in different finite spaces (modulus, size, ...)."""


class PreconditionError(ValueError):
    """A documented precondition of an operation was violated.

    ``constraint`` is a short machine-readable name for the violated
    constraint, suitable for error reports.
    """

    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


class EnumerationGuardError(RuntimeError):
    """An exhaustive scan would exceed the configured size guard."""


class ConfigError(ValueError):
    """An experiment config failed to parse or validate."""
