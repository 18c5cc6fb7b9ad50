"""Exception types shared across the package."""


class RankDeficientError(ValueError):
    """A matrix that must have full (numerical) rank does not.

    Carries the offending smallest singular value / eigenvalue so callers
    can report how close to singular the input was.
    """

    def __init__(self, message: str, sigma_min: float = 0.0):
        super().__init__(message)
        self.sigma_min = float(sigma_min)


class ParseError(ValueError):
    """A data file could not be parsed; `line` is the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = int(line)


class ThresholdUnmetError(RuntimeError):
    """Resampling exhausted its draw budget without meeting the target.

    `best_kappa` is the best condition number seen across all draws.
    """

    def __init__(self, message: str, best_kappa: float):
        super().__init__(message)
        self.best_kappa = float(best_kappa)
