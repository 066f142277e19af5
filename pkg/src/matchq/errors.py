"""Exception hierarchy shared by every matchq module."""


class MatchqError(Exception):
    """Base class for all matchq errors."""


class DomainError(MatchqError, ValueError):
    """Arguments outside the domain of an operation."""


class DegenerateModelError(DomainError):
    """The model collapses to a simpler one (e.g. a 2v2 queue with no individuals)."""


class UnstableError(DomainError):
    """Rates for which the chain is not positive recurrent; mean waits are unbounded."""


class ModelError(MatchqError):
    """Malformed or reducible Markov chain."""


class NumericalError(MatchqError):
    """A linear solve failed its residual check."""


class TruncationError(NumericalError):
    """A truncated chain kept too much probability mass at its boundary."""
