"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RespGamesError(Exception):
    """Base class for every error raised by the package."""


class ModelError(RespGamesError):
    """A game, strategy or history violates a well-formedness invariant.

    When raised by :func:`respgames.model.validate_game` the ``violations``
    attribute holds every individual problem found, not only the first.
    """

    def __init__(self, message: str, violations: list[ModelError] | None = None):
        super().__init__(message)
        self.violations: list[ModelError] = violations if violations is not None else [self]


class MissingTransition(ModelError):
    pass


class DistributionNotNormalized(ModelError):
    pass


class UnknownIdentifier(ModelError):
    pass


class UnknownState(UnknownIdentifier):
    pass


class EmptyAvailability(ModelError):
    pass


class InvalidStrategy(ModelError):
    pass


class InvalidHistory(ModelError):
    pass


class IncompatibleHistory(RespGamesError):
    """The history has probability zero under the supplied profile."""


class PartialProfile(RespGamesError):
    """A full strategy profile was required but some agents are missing."""


class SyntaxError_(RespGamesError):
    """Concrete-syntax error with a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class ModelSyntaxError(SyntaxError_):
    pass


class FormulaSyntaxError(SyntaxError_):
    pass


class HistoryTooShort(RespGamesError):
    pass


class CoalitionTooLarge(RespGamesError):
    pass


class AgentNotInScope(RespGamesError):
    pass


class UnknownProfile(RespGamesError):
    pass


class UnknownReward(RespGamesError):
    pass


class UnknownAtom(RespGamesError):
    pass


class MissingConstantStrategy(RespGamesError):
    pass


class MissingParameter(RespGamesError):
    pass


class NonPolynomial(RespGamesError):
    """The adversarial minimiser switches across the parameter simplex."""


class NoSolutionFound(RespGamesError):
    pass
