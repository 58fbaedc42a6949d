"""Exception hierarchy.

Every error raised by this package derives from :class:`EditvecError`, so
callers can catch one base class at an API boundary. The CLI maps
:class:`InvalidConfig` to exit code 2 and every other :class:`EditvecError`
to exit code 4.
"""


class EditvecError(Exception):
    """Base class for all errors raised by editvec."""


class InvalidConfig(EditvecError):
    """A configuration value violates its documented constraints."""


class DimensionMismatch(EditvecError):
    """Vectors or matrices that must share a dimension do not."""


class NonFiniteInput(EditvecError):
    """An input contains NaN or infinity."""


class EmptyGroupSet(EditvecError):
    """Fewer than two non-empty groups were supplied."""


class SingularDenominator(EditvecError):
    """The denominator matrix stayed non-invertible at the policy's largest ridge."""


class ZeroDenominatorForm(EditvecError):
    """The denominator quadratic form vanishes at the probe vector."""


class ParseError(EditvecError):
    """A data file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LabelOutOfRange(EditvecError):
    """A label lies outside [0, 1]."""


class DuplicateId(EditvecError):
    """Two records share an id."""


class DegenerateBinning(EditvecError):
    """Binning or splitting left fewer than two usable groups."""


class CoincidentCenters(EditvecError):
    """Two group centers coincide, so no direction between them exists."""


class NonBinaryLabels(EditvecError):
    """An operation requiring {0, 1} labels received other values."""


class ConstantLabels(EditvecError):
    """All labels are equal; no slope can be fitted."""


class DegenerateDistances(EditvecError):
    """All projections onto the direction are equal; no slope can be fitted."""


class ConstantSeries(EditvecError):
    """A correlation input series is constant."""
