"""Shared exception types.

Everything derives from ValueError so that callers who do not care about
the fine-grained kind can catch one thing.
"""


class SizeLimitError(ValueError):
    """A ground-set or enumeration size guard was exceeded."""


class InputMismatchError(ValueError):
    """Arguments disagree in length, alphabet, or arity."""


class CrossingPartitionError(ValueError):
    """Nested (free) evaluation was asked for a crossing partition."""


class OrderBoundError(ValueError):
    """A requested order exceeds the supported bound for this operation."""


class IncompleteTableError(ValueError):
    """A table does not carry data up to the requested order."""


class UnsupportedAlgebraError(ValueError):
    """The scalar/matrix coefficient combination is not supported here."""


class BudgetError(ValueError):
    """An index-tuple scan would exceed the configured budget."""


class SchemaError(ValueError):
    """A JSON document does not match the expected schema."""
