"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): specification
errors, raised for bad inputs or configurations, and numerical errors, raised
when a well-formed computation hits a singularity.
"""


class NoonSenseError(Exception):
    """Base class for all package errors."""


class SpecError(NoonSenseError, ValueError):
    """Invalid input, configuration or probe specification."""


class DimensionError(SpecError):
    """Mode counts or vector lengths do not match."""


class CapacityError(SpecError):
    """Mode count or photon number exceeds the desk-scale soft limits."""


class InvalidSpecError(SpecError):
    """A probe specification violates its invariants."""


class UnsupportedProbeError(SpecError):
    """The operation is not defined for this probe state."""


class NumericalError(NoonSenseError, ArithmeticError):
    """A numerical computation could not produce a finite answer."""


class SingularityError(NumericalError):
    """A Fisher-information term diverges at the requested operating point."""


class SingularInformationError(NumericalError):
    """A Fisher information matrix is singular or too ill-conditioned to invert."""


class InfeasibleCountsError(NumericalError):
    """Observed counts have zero likelihood everywhere on the search domain."""
