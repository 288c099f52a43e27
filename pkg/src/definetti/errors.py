"""Exception types raised by the numerical routines."""


class QuadratureError(ArithmeticError):
    """An integral did not reach the requested tolerance.

    ``achieved_error`` holds the last error estimate (may be ``inf``).
    """

    def __init__(self, message, achieved_error=float("inf"), location=None):
        super().__init__(message)
        self.achieved_error = achieved_error
        self.location = location


class DivergentIntegralError(QuadratureError):
    """The integrand looks non-integrable (estimates do not settle)."""


class ConvergenceError(ArithmeticError):
    """An iterative scheme (continued fraction, bisection) hit its cap."""


class InvariantViolation(AssertionError):
    """A proven inequality failed on computed values.

    The message names the measure, ``n`` and the inequality.
    """

    def __init__(self, measure, n, inequality, lhs, rhs):
        self.measure = measure
        self.n = n
        self.inequality = inequality
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"{measure}, n={n}: {inequality} violated ({lhs!r} vs {rhs!r})")
