"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so the CLI can map
them to a single exit code.
"""


class GenMarkovError(Exception):
    pass


class DimensionMismatch(GenMarkovError, ValueError):
    pass


class NumericalError(GenMarkovError):
    pass


class DefectiveMatrix(NumericalError):
    """Eigenvector matrix too ill-conditioned for a numerical spectral decomposition."""


class OscillatorySpectrum(NumericalError):
    """A nonzero eigenvalue lies on the imaginary axis, so no steady-state limit exists."""


class SingularPoint(NumericalError):
    pass


class IllConditioned(NumericalError):
    """Root clustering is ambiguous."""


class StepTooLarge(NumericalError):
    pass


class NonOscillatory(NumericalError):
    pass


class ComplexOmega(NumericalError):
    pass


class DeltaNotEvaluable(GenMarkovError, ValueError):
    pass


class Unsupported(GenMarkovError, TypeError):
    pass
