"""Exception types raised across the package.

Each error subclasses the closest builtin so callers that only know the
standard hierarchy (``except ValueError`` and friends) still behave sensibly.
"""


class QkaczmarzError(Exception):
    """Base class for all package specific failures."""


class InvalidDimension(QkaczmarzError, ValueError):
    """System or vector dimensions are unusable (m < n, n = 0, shape mismatch)."""


class DegenerateRow(QkaczmarzError, ValueError):
    """Row generation kept producing vectors too short to normalize."""


class IndexOutOfRange(QkaczmarzError, IndexError):
    """Equation index outside [0, m)."""


class MissingTruth(QkaczmarzError, ValueError):
    """An operation needed the planted solution but the system has none."""


class EmptyInput(QkaczmarzError, ValueError):
    """Quantile of an empty multiset requested."""


class SubsampleTooLarge(QkaczmarzError, ValueError):
    """Without-replacement draw larger than the index pool."""


class DomainError(QkaczmarzError, ValueError):
    """Numeric argument outside the mathematical domain of the function."""


class SideMismatch(QkaczmarzError, ValueError):
    """Tail side inconsistent with the requested deviation direction."""


class MissingOracle(QkaczmarzError, ValueError):
    """Trace diagnostics requested but the trace was recorded without them."""


class TraceInconsistency(QkaczmarzError, RuntimeError):
    """A recorded trace violates an internal invariant (solver defect)."""


class ConvergenceFailure(QkaczmarzError, RuntimeError):
    """Iterative estimate did not reach tolerance within the iteration cap."""


class SeedCollision(QkaczmarzError, RuntimeError):
    """Two grid points derived the same seed; results would be correlated."""


class InvalidSpec(QkaczmarzError, ValueError):
    """Experiment specification failed validation."""


class EmptyCurves(QkaczmarzError, ValueError):
    """SVG chart requested with no plottable data."""
