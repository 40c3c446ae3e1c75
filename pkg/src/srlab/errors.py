"""Exception types raised by srlab."""


class SrlabError(ValueError):
    """Base class for every error raised by this package."""


class DimensionMismatch(SrlabError):
    pass


class EmptyDictionary(SrlabError):
    pass


class SizeOverflow(SrlabError):
    """Requested object would exceed the configured memory budget."""


class RankDeficient(SrlabError):
    """A set of atoms is numerically linearly dependent.

    ``index`` is the position (in the caller's ordering) of the first
    atom found to lie in the span of its predecessors.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BudgetExceeded(SrlabError):
    """Exhaustive enumeration would exceed the work budget."""


class InvalidParams(SrlabError):
    pass


class DomainError(SrlabError):
    pass


class IndexOutOfRange(SrlabError):
    pass


class SchemaMismatch(SrlabError):
    pass


class ConfigError(SrlabError):
    pass
