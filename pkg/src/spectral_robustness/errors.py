"""Exception types shared across the toolkit."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class UndefinedMetricError(ValueError):
    """A metric has no defined value for the given input (e.g. all-zero data)."""


class DegenerateFitError(ValueError):
    """A regression cannot be fitted (e.g. all x values identical)."""


class TraceParseError(ValueError):
    """A trace/accuracy/metric table failed validation; message carries the line number."""


class TensorFormatError(ValueError):
    """A tensor container file is malformed or uses an unsupported layout."""
