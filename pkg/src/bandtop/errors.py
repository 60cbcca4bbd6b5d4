"""Exception hierarchy.

Every error raised on purpose by bandtop derives from :class:`BandtopError`,
so callers (and the command line front end) can sort failures into model
problems and numerical problems.
"""


class BandtopError(Exception):
    """Base class for all bandtop errors."""


class ModelError(BandtopError, ValueError):
    """Invalid model input: non-Hermitian data, bad dimensions, bad symmetry."""


class NumericalError(BandtopError, RuntimeError):
    """A numerical procedure failed to reach its stated accuracy."""


class ConvergenceError(NumericalError):
    """Iteration cap reached without convergence."""


class DegeneracyError(NumericalError):
    """A band that must be isolated is (nearly) degenerate somewhere."""

    def __init__(self, message, location=None, gap=None):
        super().__init__(message)
        self.location = location
        self.gap = gap


class AmbiguousMultiplicity(NumericalError):
    """Eigenvalue spacing falls between the merge and split tolerances."""


class GenericityError(NumericalError):
    """Degenerate components are not in generic position for a slicing."""


class NoValidSlicing(NumericalError):
    """Every slice along the requested axis meets the degenerate locus."""


class InconsistencyError(NumericalError):
    """Two independent computations of the same invariant disagree."""
