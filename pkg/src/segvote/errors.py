"""Exception types shared across the package."""


class SegvoteError(Exception):
    """Base class for all segvote errors."""


class ConfigError(SegvoteError, ValueError):
    """Invalid configuration or model parameters."""


class DimensionError(SegvoteError, ValueError):
    """Vector or segment length does not match the expected dimension."""


class CapacityError(SegvoteError, ValueError):
    """A request exceeds what the data can supply (e.g. sampling without
    replacement beyond the class size, or more classes than base-vector
    slots)."""


class StateError(SegvoteError, RuntimeError):
    """An object is in a state that cannot serve the request (e.g. an empty
    dictionary)."""


class DegenerateSupportError(SegvoteError, ValueError):
    """A discrete distribution is one-sided where a two-sided law is
    required."""


class FormatError(SegvoteError, ValueError):
    """A dataset file does not match any supported on-disk format."""


class EmptyInputError(SegvoteError, ValueError):
    """An input file or dataset contains no records."""
