"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every failure raised by the library
derives from :class:`KirchhoffError`.
"""


class KirchhoffError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(KirchhoffError):
    """Observables, states or models of different dimension tags were mixed."""


class ModelValidationError(KirchhoffError):
    """A model's parameters violate the constraints of its case."""


class PreconditionError(KirchhoffError):
    """An operation was called outside its documented domain."""


class NumericalError(KirchhoffError):
    """Base for failures of a numerical procedure."""


class StepCollapse(NumericalError):
    """Adaptive step fell below the floor, usually near a movable singularity."""


class NonFinite(NumericalError):
    """The integrated state overflowed or produced NaN."""


class SeriesError(NumericalError):
    """Log escalation in a Frobenius layer did not terminate."""


class ConfigError(KirchhoffError):
    """Run configuration could not be parsed or validated."""

    def __init__(self, message, line=None, column=None, key=None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.key = key
