"""Errors raised across the package, one class per failure condition.

All inherit from SegscanError so callers can catch the package as a whole.
The CLI maps these onto its exit codes; see segscan.cli.
"""


class SegscanError(Exception):
    """Base class for every error this package raises on purpose."""


class NonFiniteValueError(SegscanError):
    """Signal contains NaN or infinite entries."""


class EmptySignalError(SegscanError):
    """Signal has zero samples or zero dimensions."""


class RaggedInputError(SegscanError):
    """Input is not a rectangular 1D or 2D numeric array."""


class NotSortedError(SegscanError):
    """Breakpoint ends are not in increasing order."""


class DuplicateError(SegscanError):
    """Breakpoint ends contain a repeated value."""


class OutOfRangeError(SegscanError):
    """Breakpoint end lies outside [1, n_samples]."""


class MissingTerminalError(SegscanError):
    """The last breakpoint end does not equal the number of samples."""


class IndexOutOfRangeError(SegscanError):
    """Segment bounds are not 0 <= start < end <= n_samples."""


class SegmentTooShortError(SegscanError):
    """Segment is shorter than the cost family's minimum length."""


class SignalTooShortError(SegscanError):
    """Signal is shorter than the cost family's minimum segment length."""


class BadParamError(SegscanError):
    """Malformed parameter value (cost spec, search config, stopping rule)."""


class MemoryBudgetError(SegscanError):
    """Precomputation would exceed the built-in memory budget."""


class InfeasibleError(SegscanError):
    """No valid segmentation exists under the given constraints."""


class BudgetUnreachableError(SegscanError):
    """No reachable segmentation attains the requested cost budget."""


class WindowTooLargeError(SegscanError):
    """Window width exceeds the signal length."""


class MismatchedLengthError(SegscanError):
    """Operands refer to signals of different lengths."""


class SpacingInfeasibleError(SegscanError):
    """Requested breakpoints cannot be placed under the spacing floor."""


class DegenerateSignalWarning(UserWarning):
    """All sampled pairwise distances are zero; bandwidth fell back to 1.0."""
