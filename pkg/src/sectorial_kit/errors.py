"""Exception types raised across the package."""

from __future__ import annotations

from typing import Any


class DimensionError(ValueError):
    """Operands live in incompatible spaces."""


class NotFiniteError(ValueError):
    """A matrix or vector contains NaN or Inf."""


class NotHermitianError(ValueError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class NotPSDError(ValueError):
    """A Hermitian matrix has a materially negative eigenvalue."""


class NotSectorialError(ValueError):
    """A relation or form fails the sectoriality (or maximality) precondition."""


class VerificationError(AssertionError):
    """An identity that must hold did not.

    ``details`` carries a JSON-serialisable record of the offending instance and
    the residual, so that the failure can be replayed on its own.
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.details = details or {}
