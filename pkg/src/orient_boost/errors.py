"""Exception types shared across the package."""


class OrientBoostError(Exception):
    """Base class for all package errors."""


class InvalidOrientationError(OrientBoostError):
    """A directed pattern violates the no-2-cycle / no-duplicate contract."""


class InvalidTournamentError(OrientBoostError):
    """A dominance matrix is not a tournament."""


class InvalidDecompositionError(OrientBoostError):
    """A block decomposition is malformed or fails validation."""


class CongruenceError(OrientBoostError):
    """Construction parameters violate a divisibility/congruence requirement."""


class BudgetExceededError(OrientBoostError):
    """An enumeration or search exceeded its configured budget."""

    def __init__(self, message: str, *, size: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.size = size
        self.budget = budget


class InfeasibleAtDeskScale(OrientBoostError):
    """The requested construction is not achievable within desk-scale search limits."""


class RejectionBudgetError(OrientBoostError):
    """Rejection sampling used up its retry budget; retry with a new seed."""
