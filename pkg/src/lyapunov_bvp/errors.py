"""Exception types shared across modules.

Numerical failures derive from :class:`NumericalError` so that the CLI can
map them to a single exit code.
"""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical method (not of the input)."""


class IntegrationError(NumericalError):
    """A coefficient produced non-finite values during time integration."""


class ResolutionError(NumericalError):
    """An eigenvalue could not be bracketed inside the scan window."""

    def __init__(self, message, window=None):
        super().__init__(message)
        self.window = window


class NoPositiveEigenvalue(NumericalError):
    """The generalized eigenproblem has no positive eigenvalue."""


class NearSingular(NumericalError):
    """A linear solve was requested on an (almost) singular operator."""

    def __init__(self, message, sigma_min=None):
        super().__init__(message)
        self.sigma_min = sigma_min


class MaxIterExceeded(NumericalError):
    """An iteration hit its cap; ``best`` carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
