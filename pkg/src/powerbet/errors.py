"""Semantic exception hierarchy.

Every error raised by this package derives from :class:`PowerbetError`,
which itself derives from ``ValueError`` so callers that only care about
"bad input" can catch the builtin.
"""


class PowerbetError(ValueError):
    """Base class for all errors raised by this package."""


class LengthMismatchError(PowerbetError):
    """Paired vectors or tables do not have matching shapes."""


class NonPositiveProbabilityError(PowerbetError):
    """A winning probability is zero or negative where positivity is required."""


class NonPositiveOddsError(PowerbetError):
    """A payout is zero or negative."""


class NotNormalizedError(PowerbetError):
    """A probability vector does not sum to one within tolerance."""


class InvalidDistributionError(PowerbetError):
    """A distribution has negative entries or an invalid shape."""


class UnsupportedOrderError(PowerbetError):
    """The requested divergence order is outside the defined domain."""


class BetaOutOfRangeError(PowerbetError):
    """The risk parameter is outside the domain of the requested operation."""


class NotApplicableError(PowerbetError):
    """The operation's market-regime precondition does not hold."""


class GridTooLargeError(PowerbetError):
    """The requested simplex grid would exceed the enumeration guard."""


class ZeroBetError(PowerbetError):
    """A zero bet on a possible winner makes both sides of an identity -inf."""


class NotEvaluableError(PowerbetError):
    """The allocation is too degenerate for a residual check to be evaluated."""
