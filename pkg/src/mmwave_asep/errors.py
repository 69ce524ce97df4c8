class ParameterError(ValueError):
    """A parameter lies outside its valid domain."""


class NumericFailure(ArithmeticError):
    """A series or quadrature did not converge.

    ``diagnostics`` carries whatever partial state the failing routine had
    (partial sums, term counts, interval counts) so callers can log it.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
