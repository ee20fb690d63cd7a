"""Exception types shared across the package."""


class SpecshiftError(Exception):
    """Base class for all package-specific errors."""


class NonIntegralGrid(SpecshiftError):
    """A length is not an integer multiple of the grid spacing."""


class PunctureNotInterior(SpecshiftError):
    """The closed inner cube is not strictly contained in the box."""


class UnsupportedDimension(SpecshiftError):
    """Requested dimension is outside the supported set."""


class MissingCoupling(SpecshiftError):
    """A lattice site whose bump overlaps the domain has no coupling value."""


class CoveringViolated(SpecshiftError):
    """The translated single-site bumps leave part of the grid uncovered."""


class FactorizationFailed(SpecshiftError):
    """Symmetric factorization broke down even after energy jitter."""


class DimensionTooLarge(SpecshiftError):
    """Matrix dimension exceeds the dense-solver threshold."""


class GeometryMismatch(SpecshiftError):
    """Operators do not share the required active-site geometry."""


class AssumptionViolated(SpecshiftError):
    """A stated hypothesis of the estimate being probed does not hold."""


class DegenerateFit(SpecshiftError):
    """Not enough usable points to fit the requested law."""


class InvalidDelta(SpecshiftError):
    """Coupling-interval margin outside the admissible range (0, 1/4)."""


class SingularShift(SpecshiftError):
    """Resolvent requested at a real energy that may touch the spectrum."""


class SolveFailed(SpecshiftError):
    """Linear solve did not reach the required residual."""


class EnergyInSpectrum(SpecshiftError):
    """Energy is not strictly below the spectral floor."""


class ParseError(SpecshiftError):
    """Configuration input could not be parsed or is malformed."""


class RangeError(SpecshiftError):
    """A numeric parameter is outside its documented range."""
