"""Exception hierarchy shared by every module."""


class RegTowerError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RegTowerError, ValueError):
    """Malformed or inconsistent input (bad vertex ids, asymmetric matrix, ...)."""


class CapacityError(RegTowerError):
    """The requested computation exceeds a configured size cap."""


class RegimeError(RegTowerError):
    """Parameters fall outside the regime in which a formula is defined."""


class NumericalError(RegTowerError):
    """An iterative method failed to converge.

    ``bracket`` holds the best known ``(lower, upper)`` interval for the quantity.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ConstructionInfeasible(RegTowerError):
    """Rejection sampling ran out of attempts while enforcing a separation property."""

    def __init__(self, step, side, part, prop, best_margin, attempts):
        self.step = step
        self.side = side
        self.part = part
        self.property = prop
        self.best_margin = best_margin
        self.attempts = attempts
        super().__init__(
            f"step {step}: could not enforce {prop} for part {side}{part} "
            f"after {attempts} attempts (best margin {best_margin:.6g})"
        )
