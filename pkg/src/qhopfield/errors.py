"""Exception types shared across the package.

The CLI maps :class:`UsageError` to exit code 2 and :class:`NumericalError`
(and subclasses) to exit code 3.
"""


class UsageError(ValueError):
    """Invalid arguments, out-of-range parameters, or malformed configuration."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its tolerance or to converge."""


class IntegrationError(NumericalError):
    """Time integration violated a conservation tolerance.

    Carries the first offending time in ``t`` when known.
    """

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class SpectralError(NumericalError):
    """Eigenvalue computation failed or produced an invalid spectrum."""
