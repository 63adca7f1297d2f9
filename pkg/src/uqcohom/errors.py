"""Exception types raised by the library.

Every error derives from :class:`CohomologyError`; input-validation errors
also derive from :class:`ValueError` so callers can catch them generically.
"""


class CohomologyError(Exception):
    """Base class for all library errors."""


class InputError(CohomologyError, ValueError):
    """Invalid user input (bad shapes, out-of-range parameters)."""


class NonPositiveEntry(InputError):
    pass


class AmbiguousGrouping(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class BlockOutOfRange(InputError):
    pass


class DegenerateTriple(InputError):
    pass


class QOutOfRange(InputError):
    pass


class ParameterOrderViolation(InputError):
    pass


class CompressionTooLarge(InputError):
    pass


class CaseMismatch(InputError):
    pass


class RepresentationMismatch(InputError):
    pass


class NotNormalized(InputError):
    pass


class NotExactRepresentation(InputError):
    pass


class SpectrumMismatch(InputError):
    pass


class IndexNotInBlock(InputError):
    pass


class IllConditionedGap(CohomologyError):
    """No clear singular-value gap at the requested cutoff."""

    def __init__(self, message, singular_values=None, rank=None, gap=None):
        super().__init__(message)
        self.singular_values = singular_values
        self.rank = rank
        self.gap = gap


class CrossCheckFailed(CohomologyError):
    pass


class RecurrenceOverflow(CohomologyError):
    """The recurrence left the representable range of the float type."""


class NoConvergenceWithinBudget(CohomologyError):
    def __init__(self, message, estimate=None, k_reached=None):
        super().__init__(message)
        self.estimate = estimate
        self.k_reached = k_reached


class TruncationCapExceeded(CohomologyError):
    pass


class NotACoboundary(CohomologyError):
    pass


class NoValidSelection(CohomologyError):
    pass


class UnsupportedGPCase(CohomologyError):
    pass


class SpanShortfall(CohomologyError):
    def __init__(self, message, achieved_rank=None, target_rank=None):
        super().__init__(message)
        self.achieved_rank = achieved_rank
        self.target_rank = target_rank


class EliminationFailed(CohomologyError):
    def __init__(self, message, trace_table=None):
        super().__init__(message)
        self.trace_table = trace_table
