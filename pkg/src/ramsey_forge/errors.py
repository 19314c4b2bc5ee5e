"""Exception types shared across the package.

Search operations that may legitimately come up empty (canonizers, witness
search) return ``None`` instead of raising; the classes here are for invalid
input and for queries that exceed their computational budget.
"""

from __future__ import annotations


class RamseyForgeError(Exception):
    """Base class for all package errors."""


class DomainError(RamseyForgeError, ValueError):
    """Input outside the domain of an operation (bad index, signature mismatch)."""


class ValidationError(DomainError):
    """A structured input failed validation.

    ``clause`` names the violated condition when there is one, e.g. ``"c"`` for
    an order prescription that puts ``=`` between two non-shared points.
    """

    def __init__(self, message: str, clause: str | None = None):
        super().__init__(message)
        self.clause = clause


class NotFoundError(RamseyForgeError, LookupError):
    """An object that the caller required to exist does not exist."""


class ResourceError(RamseyForgeError):
    """The requested computation exceeds its budget.

    ``cost`` is the computed size of the search (number of colorings,
    candidates, partitions...) and ``budget`` the limit it was checked against.
    """

    def __init__(self, message: str, cost: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.cost = cost
        self.budget = budget

    def to_dict(self) -> dict:
        return {"error": "budget", "message": str(self), "cost": self.cost, "budget": self.budget}


class ResolutionError(RamseyForgeError):
    """A prefix-based estimate did not stabilize; a deeper prefix is needed."""
