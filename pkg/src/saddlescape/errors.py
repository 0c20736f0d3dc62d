"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: configuration/validation problems exit
with 1, numerical failures with 2.
"""


class SaddlescapeError(Exception):
    """Base class for all library errors."""


class ConfigurationError(SaddlescapeError):
    """Invalid parameters, malformed config files, undefined schedules."""


class CapabilityError(ConfigurationError):
    """An operation requires an oracle the problem does not expose."""


class ScheduleError(ConfigurationError):
    """A theorem schedule is undefined for the requested epsilon/metadata."""


class EvaluationError(SaddlescapeError):
    """A statistic cannot be computed from the data at hand."""


class NumericalError(SaddlescapeError):
    """Non-finite iterates, failed factorizations, and similar breakdowns.

    ``iterate`` carries the offending iteration index when known; ``trace``
    carries the partial run trace collected before the failure.
    """

    def __init__(self, message, iterate=None, trace=None):
        super().__init__(message)
        self.iterate = iterate
        self.trace = trace
