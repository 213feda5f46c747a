"""Typed failures raised by the numerical core.

The CLI maps every subclass of :class:`NumericalError` to exit code 3.
"""


class NumericalError(RuntimeError):
    """Base class for failures of the analytic or brute-force machinery."""


class DegenerateCoupling(NumericalError, ValueError):
    """A Fano asymmetry parameter was requested with a zero denominator."""


class DegenerateRabi(NumericalError):
    """Rabi splitting too small for the two-branch decomposition."""


class DefectiveMatrix(NumericalError):
    """Eigenvector matrix is (numerically) singular."""


class NoConvergence(NumericalError):
    """Simultaneous root iteration hit its iteration cap."""

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class SingularDeterminant(NumericalError):
    """Determinant of the dressed-continuum system vanishes."""


class StepFailure(NumericalError):
    """Time integrator could not meet its error tolerance."""
