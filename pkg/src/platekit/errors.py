"""Exception types raised across the package."""


class PlacementError(ValueError):
    """An action is out of bounds, off the plate, or otherwise unusable."""


class PlanningError(RuntimeError):
    """The action-sequence optimizer could not produce any valid rollout."""


class NumericalError(RuntimeError):
    """A matrix factorization failed despite jitter escalation."""
