"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition or invariant."""


class DegenerateDistributionError(DomainError):
    """A probability density integrates to zero (or is not finite) on the
    requested window, so no distribution can be built from it."""
