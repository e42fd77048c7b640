"""Exception types shared across the package.

Input/contract violations raise ``ValueError`` (CLI exit code 1); failures of
the numerics themselves raise ``NumericalError`` (CLI exit code 2).
"""


class NumericalError(RuntimeError):
    """A numerical procedure failed (factorization, eigensolve, inner solve)."""


class NonconvergenceError(NumericalError):
    """An iterative solve did not reach its tolerance within the iteration cap."""


class NoAdmissiblePivot(NumericalError):
    """No pivot position on the requested constraint line satisfies the sign conditions."""
