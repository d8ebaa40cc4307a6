class NextError(Exception):
    """Base class for every error raised by this package."""


class LogicalFormError(NextError):
    """A logical form violates arity, typing or informativeness constraints."""

    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = errors or []


class SexprSyntaxError(NextError):
    """Malformed s-expression text."""


class AnchorMissing(NextError):
    """A form references an anchor role that the instance does not carry."""


class CategoryError(NextError):
    """Malformed CCG category or lexicon entry."""


class NoParse(NextError):
    """No complete derivation covers the explanation."""


class NoConsistentParse(NextError):
    """No candidate parse strict-matches its source instance with the right label."""


class DomainError(NextError, ValueError):
    """A fuzzy-logic operand lies outside [0, 1]."""


class EmptyQuery(NextError, ValueError):
    """A string-match query has no tokens."""


class ConfigError(NextError):
    """Invalid configuration values or files."""


class DegeneratePartition(NextError):
    """Joint training needs at least one strictly matched instance."""


class DataFormatError(NextError):
    """A data file record cannot be decoded."""
