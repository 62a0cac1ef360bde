"""Power-mean utilities, the doubling rate, and their divergence decompositions.

The central quantity is ``U_beta = (1/beta) * log2 E[S^beta]``: the base-2
logarithm of a weighted power mean of the payoffs.  For finite nonzero
``beta < 1`` it splits exactly into three terms,

    log2(c) + D_{1/(1-beta)}(p || r) - D_{1-beta}(g || b),

where ``c`` is the track constant, ``r`` the bookie-implied distribution,
and ``g`` the optimal allocation.  The reports produced here compute both
sides of that identity through independent code paths (a direct power-mean
sum versus divergence calls) and expose the residual.

Extended-real conventions: a zero bet on a possible winner makes the
utility ``-inf`` for negative ``beta`` and simply drops the term for
positive ``beta``.  Values are never NaN; ``-inf`` compares below every
finite value so optimizers handle degenerate allocations gracefully.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .divergence import cond_renyi_div, renyi_div
from .errors import BetaOutOfRangeError, LengthMismatchError, ZeroBetError
from .market import RaceMarket, SideInfoMarket, bookie_distribution, track_constant
from .strategy import (
    Allocation,
    ConditionalAllocation,
    PartialAllocation,
    _check_finite_beta,
    _check_interior_beta,
    optimal_full,
    optimal_side_info,
)

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class DecompositionReport:
    """Three-term split of a utility plus its independently computed value.

    ``total = log_c + bookie_term - gambler_term`` and ``direct`` is the
    same utility evaluated straight from the payoff sum; ``residual`` is
    their absolute difference (zero when both are the same infinity).
    """

    log_c: float
    bookie_term: float
    gambler_term: float
    total: float
    direct: float
    residual: float


def _require_same_length(market, bets) -> None:
    if bets.shape[-1] != market.odds.size:
        raise LengthMismatchError(
            f"allocation covers {bets.shape[-1]} horses but the market has {market.odds.size}"
        )


def _log2_power_mean(probs: np.ndarray, payoffs: np.ndarray, beta: float) -> float:
    """``(1/beta) * log2 sum p_i * payoff_i^beta`` with zero-payoff conventions."""
    if beta < 0.0 and np.any(payoffs == 0.0):
        return -math.inf
    mask = payoffs > 0.0
    if not np.any(mask):
        return -math.inf
    terms = np.log(probs[mask]) + beta * np.log(payoffs[mask])
    return float(logsumexp(terms)) / (beta * _LN2)


def utility_full(market: RaceMarket, b: Allocation, beta: float) -> float:
    """Utility of a full-investment allocation for finite nonzero ``beta``, in bits."""
    beta = _check_finite_beta(beta)
    if beta == 0.0:
        raise BetaOutOfRangeError("beta must be nonzero; the beta -> 0 limit is doubling_rate")
    _require_same_length(market, b.bets)
    return _log2_power_mean(market.probs, b.bets * market.odds, beta)


def doubling_rate(market: RaceMarket, b: Allocation) -> float:
    """Expected log2 wealth growth per race, ``sum p_i log2(b_i o_i)``."""
    _require_same_length(market, b.bets)
    if np.any(b.bets == 0.0):
        return -math.inf
    return float(np.sum(market.probs * np.log2(b.bets * market.odds)))


def utility_partial(market: RaceMarket, b: PartialAllocation, beta: float) -> float:
    """Utility when a cash fraction is withheld: payoffs are ``cash + b_i o_i``."""
    beta = _check_finite_beta(beta)
    if beta == 0.0:
        raise BetaOutOfRangeError("beta must be nonzero")
    _require_same_length(market, b.bets)
    return _log2_power_mean(market.probs, b.cash + b.bets * market.odds, beta)


def utility_side_info(market: SideInfoMarket, b: ConditionalAllocation, beta: float) -> float:
    """Utility of a conditional allocation: payoff ``b(x|y) o(x)`` weighted by the joint."""
    beta = _check_finite_beta(beta)
    if beta == 0.0:
        raise BetaOutOfRangeError("beta must be nonzero")
    if b.table.shape != market.joint.shape:
        raise LengthMismatchError(
            f"allocation table has shape {b.table.shape} but the joint has {market.joint.shape}"
        )
    weights = market.joint.ravel()
    payoffs = (b.table * market.odds[None, :]).ravel()
    live = weights > 0.0
    return _log2_power_mean(weights[live], payoffs[live], beta)


def limit_utilities(market: RaceMarket, b: Allocation) -> tuple[float, float]:
    """Best-case and worst-case log2 payoffs, ``(log2 max b_i o_i, log2 min b_i o_i)``.

    These are the utility limits as the risk parameter goes to ``+inf`` and
    ``-inf``; the minimum runs over all horses, so any zero bet makes the
    worst case ``-inf``.
    """
    _require_same_length(market, b.bets)
    payoffs = b.bets * market.odds
    with np.errstate(divide="ignore"):
        logs = np.log2(payoffs)
    return float(logs.max()), float(logs.min())


def _residual(total: float, direct: float) -> float:
    if total == direct:
        # Covers the matching-infinity case without producing NaN.
        return 0.0
    return abs(total - direct)


def decompose_full(market: RaceMarket, b: Allocation, beta: float) -> DecompositionReport:
    """Three-term report for a full-investment allocation, finite ``beta < 1``."""
    beta = _check_interior_beta(beta)
    _require_same_length(market, b.bets)
    g = optimal_full(market, beta)
    log_c = math.log2(track_constant(market))
    bookie = renyi_div(market.probs, bookie_distribution(market), 1.0 / (1.0 - beta))
    gambler = renyi_div(g.bets, b.bets, 1.0 - beta)
    total = log_c + bookie - gambler
    direct = utility_full(market, b, beta)
    return DecompositionReport(log_c, bookie, gambler, total, direct, _residual(total, direct))


def decompose_kelly(market: RaceMarket, b: Allocation) -> DecompositionReport:
    """KL-based report for the doubling rate: ``log c + D(p||r) - D(p||b)``."""
    _require_same_length(market, b.bets)
    if np.any(b.bets == 0.0):
        raise ZeroBetError("a zero bet makes the doubling rate and its split both -inf")
    log_c = math.log2(track_constant(market))
    bookie = renyi_div(market.probs, bookie_distribution(market), 1.0)
    gambler = renyi_div(market.probs, b.bets, 1.0)
    total = log_c + bookie - gambler
    direct = doubling_rate(market, b)
    return DecompositionReport(log_c, bookie, gambler, total, direct, _residual(total, direct))


def decompose_side_info(
    market: SideInfoMarket, b: ConditionalAllocation, beta: float
) -> DecompositionReport:
    """Three-term report with side information, finite ``beta < 1``.

    The bookie term is the conditional divergence of the winner-given-signal
    table from the bookie distribution; the gambler term compares the joint
    distributions ``g(x|y) g(y)`` and ``b(x|y) g(y)`` built from the optimal
    signal weights.
    """
    beta = _check_interior_beta(beta)
    if b.table.shape != market.joint.shape:
        raise LengthMismatchError(
            f"allocation table has shape {b.table.shape} but the joint has {market.joint.shape}"
        )
    g_cond, g_y = optimal_side_info(market, beta)
    log_c = math.log2(track_constant(market))
    r = bookie_distribution(market)
    r_table = np.broadcast_to(r, market.joint.shape)
    bookie = cond_renyi_div(
        market.conditional(), r_table, market.signal_probs, 1.0 / (1.0 - beta)
    )
    g_joint = (g_cond.table * g_y[:, None]).ravel()
    b_joint = (b.table * g_y[:, None]).ravel()
    gambler = renyi_div(g_joint, b_joint, 1.0 - beta)
    total = log_c + bookie - gambler
    direct = utility_side_info(market, b, beta)
    return DecompositionReport(log_c, bookie, gambler, total, direct, _residual(total, direct))
