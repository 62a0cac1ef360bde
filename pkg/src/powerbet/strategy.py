"""Optimal bet allocations for every risk regime.

The utility being maximized is ``(1/beta) * log2 E[S^beta]`` where ``S`` is
the wealth relative after one race.  The risk parameter is handled as a
plain float with three conventions:

* ``beta == 0.0`` stands for the log-utility limit (proportional betting),
* ``beta == +inf`` / ``-inf`` stand for the best-case / worst-case limits,
* any other finite nonzero value is used literally.

For finite ``beta < 1`` an interior closed form exists; for ``beta >= 1``
the optimum is a single-horse bet; the infinite limits are a single-horse
bet on the longest odds and risk-free odds replication respectively.  All
argmax ties break to the smallest horse index so outputs are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BetaOutOfRangeError,
    InvalidDistributionError,
    LengthMismatchError,
    NotApplicableError,
    NotNormalizedError,
)
from .market import (
    NORMALIZATION_TOL,
    RaceMarket,
    SideInfoMarket,
    bookie_distribution,
    is_subfair,
    _freeze,
)

# Finite risk parameters beyond these bounds overflow the closed-form
# exponents; callers must use the limit operations instead.
BETA_ABS_MAX = 1e6
BETA_FULL_SUP = 1.0 - 1e-9


@dataclass(frozen=True)
class Allocation:
    """Full-investment bet fractions: a probability vector over horses."""

    bets: np.ndarray

    def __post_init__(self) -> None:
        bets = np.asarray(self.bets, dtype=float)
        if bets.ndim != 1 or bets.size < 1:
            raise InvalidDistributionError(f"bets must be a nonempty 1-D vector, got shape {bets.shape}")
        if not np.all(np.isfinite(bets)) or np.any(bets < 0.0):
            raise InvalidDistributionError("bet fractions must be finite and >= 0")
        total = bets.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalizedError(f"bet fractions sum to {total!r} instead of 1")
        object.__setattr__(self, "bets", _freeze(bets / total))

    @property
    def m(self) -> int:
        return self.bets.size


@dataclass(frozen=True)
class PartialAllocation:
    """Bet fractions plus a withheld cash fraction; together they sum to one."""

    cash: float
    bets: np.ndarray

    def __post_init__(self) -> None:
        cash = float(self.cash)
        bets = np.asarray(self.bets, dtype=float)
        if bets.ndim != 1 or bets.size < 1:
            raise InvalidDistributionError(f"bets must be a nonempty 1-D vector, got shape {bets.shape}")
        if not math.isfinite(cash) or cash < 0.0:
            raise InvalidDistributionError("cash fraction must be finite and >= 0")
        if not np.all(np.isfinite(bets)) or np.any(bets < 0.0):
            raise InvalidDistributionError("bet fractions must be finite and >= 0")
        total = cash + bets.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalizedError(f"cash plus bets sums to {total!r} instead of 1")
        object.__setattr__(self, "cash", float(cash / total))
        object.__setattr__(self, "bets", _freeze(bets / total))

    @property
    def m(self) -> int:
        return self.bets.size


@dataclass(frozen=True)
class ConditionalAllocation:
    """Per-signal bet fractions: each row is a probability vector over horses."""

    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2 or table.size < 1:
            raise InvalidDistributionError(f"table must be a 2-D array, got shape {table.shape}")
        if not np.all(np.isfinite(table)) or np.any(table < 0.0):
            raise InvalidDistributionError("bet fractions must be finite and >= 0")
        totals = table.sum(axis=1)
        bad = np.flatnonzero(np.abs(totals - 1.0) > NORMALIZATION_TOL)
        if bad.size:
            raise NotNormalizedError(f"row {bad[0]} sums to {totals[bad[0]]!r} instead of 1")
        object.__setattr__(self, "table", _freeze(table / totals[:, None]))

    @property
    def n_signals(self) -> int:
        return self.table.shape[0]

    @property
    def m(self) -> int:
        return self.table.shape[1]


@dataclass(frozen=True)
class PartialSolution:
    """Optimal partial-investment result.

    ``support`` lists the horses receiving positive bets.  In the subfair
    regime ``gamma_cap`` is the payoff threshold (bets are positive exactly
    where ``p_i * o_i`` exceeds it) and ``gammas`` are the per-horse
    coefficients with ``bets_i = gammas_i * cash``.  When the track
    constant is >= 1 the optimum invests everything, those two closed-form
    quantities do not exist, and both fields are None.
    """

    allocation: PartialAllocation
    support: tuple[int, ...]
    gamma_cap: float | None
    gammas: np.ndarray | None
    utility: float


def _check_finite_beta(beta: float) -> float:
    beta = float(beta)
    if math.isnan(beta):
        raise BetaOutOfRangeError("risk parameter must not be NaN")
    if abs(beta) > BETA_ABS_MAX:
        raise BetaOutOfRangeError(
            f"|beta| is capped at {BETA_ABS_MAX:g}; use the limit operations beyond that"
        )
    return beta


def _check_interior_beta(beta: float) -> float:
    """Validate beta for the interior closed form: finite, nonzero, < 1."""
    beta = _check_finite_beta(beta)
    if beta == 0.0 or beta > BETA_FULL_SUP:
        raise BetaOutOfRangeError(
            f"the interior optimum needs beta in (-inf, 0) or (0, 1), got {beta!r}"
        )
    return beta


def optimal_full(market: RaceMarket, beta: float) -> Allocation:
    """Unique full-investment optimum for finite nonzero ``beta < 1``.

    The optimal fraction on horse ``i`` is proportional to
    ``p_i^(1/(1-beta)) * o_i^(beta/(1-beta))``; every entry is strictly
    positive.  Exponents are applied in the log domain so parameters close
    to 1 do not overflow.
    """
    beta = _check_interior_beta(beta)
    scores = (np.log(market.probs) + beta * np.log(market.odds)) / (1.0 - beta)
    scores -= scores.max()
    weights = np.exp(scores)
    return Allocation(weights / weights.sum())


def kelly(market: RaceMarket) -> Allocation:
    """Proportional betting ``b = p``: the log-utility (doubling-rate) optimum."""
    return Allocation(market.probs)


def optimal_degenerate(market: RaceMarket, beta: float) -> Allocation:
    """All-in bet for ``beta >= 1``: everything on the horse maximizing ``p_i^(1/beta) o_i``.

    Ties go to the smallest index.  Other maximizers may exist; uniqueness
    is not claimed.
    """
    beta = _check_finite_beta(beta)
    if beta < 1.0:
        raise BetaOutOfRangeError(f"the single-horse optimum needs beta >= 1, got {beta!r}")
    scores = np.log(market.probs) / beta + np.log(market.odds)
    winner = int(np.argmax(scores))
    bets = np.zeros(market.m)
    bets[winner] = 1.0
    return Allocation(bets)


def optimal_limit(market: RaceMarket, which: float) -> Allocation:
    """Optimal allocation in the extreme risk limits.

    ``which = +inf`` maximizes the best-case payoff: all mass on the
    longest odds (ties to the smallest index).  ``which = -inf`` maximizes
    the worst-case payoff: ``b_i = c / o_i``, which replicates the track
    constant risk-free so the wealth relative equals ``c`` no matter who
    wins.
    """
    which = float(which)
    if which == math.inf:
        bets = np.zeros(market.m)
        bets[int(np.argmax(market.odds))] = 1.0
        return Allocation(bets)
    if which == -math.inf:
        return Allocation(bookie_distribution(market))
    raise BetaOutOfRangeError(f"limit selector must be +inf or -inf, got {which!r}")


def optimal_side_info(
    market: SideInfoMarket, beta: float
) -> tuple[ConditionalAllocation, np.ndarray]:
    """Optimal conditional allocation given a pre-race signal, for finite ``beta < 1``.

    Returns the per-signal optimal rows together with the auxiliary signal
    weights ``g(y)`` proportional to
    ``p(y) * [sum_x p(x|y)^(1/(1-beta)) o(x)^(beta/(1-beta))]^(1-beta)``.
    Horses that cannot win under a signal get a zero fraction in that row.
    """
    beta = _check_interior_beta(beta)
    p_cond = market.conditional()
    p_y = market.signal_probs
    with np.errstate(divide="ignore"):
        scores = (np.log(p_cond) + beta * np.log(market.odds)[None, :]) / (1.0 - beta)
    row_max = scores.max(axis=1)
    assert np.all(np.isfinite(row_max)), "every signal row has a positive entry"
    weights = np.exp(scores - row_max[:, None])
    row_sums = weights.sum(axis=1)
    table = weights / row_sums[:, None]

    # log of the row normalizer in natural units, for the signal weights
    inner = row_max + np.log(row_sums)
    signal_scores = np.log(p_y) + (1.0 - beta) * inner
    signal_scores -= signal_scores.max()
    g_y = np.exp(signal_scores)
    g_y /= g_y.sum()
    return ConditionalAllocation(table), g_y


def _partial_candidate(
    market: RaceMarket, beta: float, chosen: np.ndarray
) -> tuple[float, np.ndarray] | None:
    """Closed-form candidate for one support set, or None when it is undefined.

    ``chosen`` flags the horses assumed to carry positive bets.  The
    threshold is ``cap = (1 - sum_J p_i) / (1 - sum_J 1/o_i)`` and the
    coefficients are
    ``gamma_i = max(0, cap^(1/(beta-1)) p_i^(1/(1-beta)) o_i^(beta/(1-beta)) - 1/o_i)``.
    """
    p, o = market.probs, market.odds
    denom = 1.0 - float(np.sum(1.0 / o[chosen]))
    if denom <= 0.0:
        return None
    cap = (1.0 - float(np.sum(p[chosen]))) / denom
    if cap <= 0.0:
        return None
    log_terms = (np.log(p) - math.log(cap) + beta * np.log(o)) / (1.0 - beta)
    with np.errstate(over="ignore"):
        gammas = np.maximum(0.0, np.exp(log_terms) - 1.0 / o)
    if not np.all(np.isfinite(gammas)):
        return None
    return cap, gammas


def optimal_partial(market: RaceMarket, beta: float) -> PartialSolution:
    """Optimal allocation when withholding cash is allowed, for finite ``beta < 1``.

    With a fair or superfair track (c >= 1) holding cash never helps, so the
    full-investment optimum is returned with zero cash.  With subfair odds
    the optimum always keeps some cash; its support is a prefix of the
    horses ordered by decreasing ``p_i * o_i``.  Every prefix is tried: the
    closed form for the support yields a candidate allocation (skipped when
    its threshold is undefined or a coefficient overflows), candidates are
    scored by their utility, and the best one wins with ties going to the
    smaller support.
    """
    from .utility import utility_partial

    beta = _check_interior_beta(beta)
    if not is_subfair(market):
        full = optimal_full(market, beta)
        alloc = PartialAllocation(0.0, full.bets)
        return PartialSolution(
            allocation=alloc,
            support=tuple(range(market.m)),
            gamma_cap=None,
            gammas=None,
            utility=utility_partial(market, alloc, beta),
        )

    order = np.argsort(-market.probs * market.odds, kind="stable")
    best: PartialSolution | None = None
    chosen = np.zeros(market.m, dtype=bool)
    for k in range(market.m + 1):
        if k > 0:
            chosen[order[k - 1]] = True
        candidate = _partial_candidate(market, beta, chosen)
        if candidate is None:
            continue
        cap, gammas = candidate
        cash = 1.0 / (1.0 + gammas.sum())
        alloc = PartialAllocation(cash, gammas * cash)
        value = utility_partial(market, alloc, beta)
        if best is None or value > best.utility:
            best = PartialSolution(
                allocation=alloc,
                support=tuple(int(i) for i in np.flatnonzero(alloc.bets > 0.0)),
                gamma_cap=cap,
                gammas=_freeze(gammas),
                utility=value,
            )
    if best is None:
        raise BetaOutOfRangeError(
            f"every candidate support overflowed at beta={beta!r}; "
            "the solution is not representable this close to 1"
        )
    return best


def fold_cash_into_bets(market: RaceMarket, partial: PartialAllocation) -> Allocation:
    """Convert withheld cash into bets without lowering any payoff (needs c >= 1).

    Spreads the cash across horses in bookie proportions:
    ``b'_i = r_i * cash + b_i``.  Since one unit spread as ``r`` pays the
    track constant no matter who wins, each payoff changes from
    ``cash + b_i o_i`` to ``c * cash + b_i o_i``, which is no decrease when
    ``c >= 1``, so the utility never drops for any risk parameter.
    """
    if is_subfair(market):
        raise NotApplicableError("folding cash into bets requires a track constant >= 1")
    if partial.m != market.m:
        raise LengthMismatchError(
            f"allocation covers {partial.m} horses but the market has {market.m}"
        )
    return Allocation(bookie_distribution(market) * partial.cash + partial.bets)


def dispatch(
    market: RaceMarket, beta: float, partial: bool = False
) -> Allocation | PartialAllocation:
    """Route to the optimizer matching the risk parameter and investment mode.

    ``beta = 0.0`` picks proportional betting, ``+/-inf`` the limit
    strategies, ``beta >= 1`` the single-horse bet, and any other finite
    value the interior optimum.  ``partial=True`` is supported only for
    finite nonzero ``beta < 1``, the regime where the cash closed form
    exists.
    """
    beta = float(beta)
    if partial:
        if beta == 0.0 or math.isinf(beta) or beta >= 1.0:
            raise BetaOutOfRangeError(
                "partial investment is only solvable for finite nonzero beta < 1"
            )
        return optimal_partial(market, beta).allocation
    if beta == 0.0:
        return kelly(market)
    if math.isinf(beta):
        return optimal_limit(market, beta)
    if beta >= 1.0:
        return optimal_degenerate(market, beta)
    return optimal_full(market, beta)
