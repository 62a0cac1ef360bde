"""Race markets and the quantities derived purely from odds.

Odds are stored as "o-for-1" total payout: a unit stake on horse ``i``
returns ``o_i`` if it wins and nothing otherwise.  The track constant
``c = 1 / sum(1/o_i)`` classifies the market (subfair ``c < 1``, fair
``c = 1``, superfair ``c > 1``) and induces the bookie-implied
distribution ``r_i = c / o_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    InvalidDistributionError,
    LengthMismatchError,
    NonPositiveOddsError,
    NonPositiveProbabilityError,
    NotNormalizedError,
)

# Input probability vectors may deviate from unit sum by this much; they are
# renormalized exactly after validation.  User-entered decimals rarely sum
# to exactly 1.
NORMALIZATION_TOL = 1e-9

# Equality band around c = 1 for the fairness classification.  c = 1 is a
# measure-zero case that users construct intentionally with exact
# reciprocals, so the band is tight.
FAIRNESS_TOL = 1e-12


def _as_float_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidDistributionError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class RaceMarket:
    """An m-horse race: strictly positive winning probabilities and odds.

    ``probs`` must sum to one within :data:`NORMALIZATION_TOL`; it is
    renormalized exactly on construction.  Instances are immutable and
    safe to share across threads.
    """

    probs: np.ndarray
    odds: np.ndarray

    def __post_init__(self) -> None:
        probs = _as_float_vector(self.probs, "probs")
        odds = _as_float_vector(self.odds, "odds")
        if probs.shape != odds.shape:
            raise LengthMismatchError(
                f"probs has length {probs.size} but odds has length {odds.size}"
            )
        if probs.size < 1:
            raise LengthMismatchError("a race needs at least one horse")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
            raise NonPositiveProbabilityError("all winning probabilities must be finite and > 0")
        if not np.all(np.isfinite(odds)) or np.any(odds <= 0.0):
            raise NonPositiveOddsError("all odds must be finite and > 0")
        total = probs.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalizedError(
                f"probabilities sum to {total!r}, deviating from 1 by more than {NORMALIZATION_TOL}"
            )
        object.__setattr__(self, "probs", _freeze(probs / total))
        object.__setattr__(self, "odds", _freeze(odds))

    @property
    def m(self) -> int:
        """Number of horses."""
        return self.probs.size


def new_race(probs, odds) -> RaceMarket:
    """Validate and build a :class:`RaceMarket` from probability and odds vectors."""
    return RaceMarket(np.asarray(probs, dtype=float), np.asarray(odds, dtype=float))


@dataclass(frozen=True)
class SideInfoMarket:
    """A race jointly distributed with a pre-race signal.

    ``joint[y, x]`` is the probability that signal ``y`` is observed and
    horse ``x`` wins (rows are signals, columns are horses).  Every signal
    must have positive marginal probability; individual horses may have
    zero winning probability.  ``odds`` maps each horse to its payout.
    """

    joint: np.ndarray
    odds: np.ndarray

    def __post_init__(self) -> None:
        joint = np.asarray(self.joint, dtype=float)
        odds = _as_float_vector(self.odds, "odds")
        if joint.ndim != 2:
            raise InvalidDistributionError(f"joint must be a 2-D table, got shape {joint.shape}")
        if joint.shape[1] != odds.size:
            raise LengthMismatchError(
                f"joint has {joint.shape[1]} horse columns but odds has length {odds.size}"
            )
        if joint.shape[0] < 1 or joint.shape[1] < 1:
            raise LengthMismatchError("joint must have at least one signal and one horse")
        if not np.all(np.isfinite(joint)) or np.any(joint < 0.0):
            raise InvalidDistributionError("joint entries must be finite and >= 0")
        if not np.all(np.isfinite(odds)) or np.any(odds <= 0.0):
            raise NonPositiveOddsError("all odds must be finite and > 0")
        total = joint.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalizedError(
                f"joint sums to {total!r}, deviating from 1 by more than {NORMALIZATION_TOL}"
            )
        joint = joint / total
        if np.any(joint.sum(axis=1) <= 0.0):
            raise InvalidDistributionError("every signal must have positive marginal probability")
        object.__setattr__(self, "joint", _freeze(joint))
        object.__setattr__(self, "odds", _freeze(odds))

    @property
    def n_signals(self) -> int:
        return self.joint.shape[0]

    @property
    def n_horses(self) -> int:
        return self.joint.shape[1]

    @property
    def signal_probs(self) -> np.ndarray:
        """Marginal distribution of the signal (always strictly positive)."""
        return self.joint.sum(axis=1)

    @property
    def horse_probs(self) -> np.ndarray:
        """Marginal winning probabilities (entries may be zero)."""
        return self.joint.sum(axis=0)

    def conditional(self) -> np.ndarray:
        """Winner distribution given each signal, as a rows-are-signals table."""
        return self.joint / self.signal_probs[:, None]


def new_side_info(joint, odds) -> SideInfoMarket:
    """Validate and build a :class:`SideInfoMarket` from a joint table and odds."""
    return SideInfoMarket(np.asarray(joint, dtype=float), np.asarray(odds, dtype=float))


class FairnessTag(str, Enum):
    SUBFAIR = "subfair"
    FAIR = "fair"
    SUPERFAIR = "superfair"


@dataclass(frozen=True)
class Fairness:
    """Fairness classification of a market together with its track constant."""

    tag: FairnessTag
    c: float


def track_constant(market: RaceMarket | SideInfoMarket) -> float:
    """Track constant ``c``: reciprocal of the sum of reciprocal odds."""
    return 1.0 / float(np.sum(1.0 / market.odds))


def bookie_distribution(market: RaceMarket | SideInfoMarket) -> np.ndarray:
    """Bookie-implied probability vector ``r`` with ``r_i = c / o_i``."""
    inv = 1.0 / market.odds
    return inv / inv.sum()


def classify_fairness(market: RaceMarket | SideInfoMarket) -> Fairness:
    """Classify the odds as subfair, fair, or superfair from the track constant."""
    c = track_constant(market)
    if abs(c - 1.0) <= FAIRNESS_TOL:
        tag = FairnessTag.FAIR
    elif c < 1.0:
        tag = FairnessTag.SUBFAIR
    else:
        tag = FairnessTag.SUPERFAIR
    return Fairness(tag=tag, c=c)


def is_subfair(market: RaceMarket | SideInfoMarket) -> bool:
    """True when the track constant is below the fair band (c < 1 - tol)."""
    return classify_fairness(market).tag is FairnessTag.SUBFAIR
