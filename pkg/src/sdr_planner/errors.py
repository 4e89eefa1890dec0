"""Exception types shared across the planner."""


class ValidationError(ValueError):
    """An input violates a documented constraint.

    Messages name the offending field and the constraint, e.g.
    ``"service.pickup_min: must be >= 0"``.
    """


class NotApplicableError(RuntimeError):
    """The requested quantity is undefined under the scenario's policy."""
