"""Exception types shared across the package."""


class LipcontrolError(Exception):
    """Base class for all package-specific failures."""


class ResourceLimitError(LipcontrolError):
    """A configured size cap (box count, point count) was exceeded."""


class DegenerateInputError(LipcontrolError):
    """Input is too degenerate for the requested statistic (e.g. all radii zero)."""


class InsufficientPointsError(LipcontrolError):
    """A construction ran out of sequence points to consume."""


class NotDenseEnoughError(LipcontrolError):
    """The sequence fails a per-ball density quota within the truncation horizon."""


class InternalConsistencyError(LipcontrolError):
    """A certified invariant failed; this signals a bug, never a legal outcome."""


class HypothesisViolationError(LipcontrolError):
    """A moving map does not satisfy the required boundary conditions."""


class CrossingNotFoundError(LipcontrolError):
    """The fixed-point search exhausted its budget without certifying a crossing."""

    def __init__(self, message: str, best_displacement: float | None = None):
        super().__init__(message)
        self.best_displacement = best_displacement
