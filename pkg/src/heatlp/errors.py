class ConvergenceError(ArithmeticError):
    """A quadrature, series or optimizer failed to reach its tolerance."""


class TruncationError(ConvergenceError):
    """A truncated expansion or time window leaves too much mass in the tail."""

    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, msg, key=None):
        super().__init__(msg)
        self.key = key
