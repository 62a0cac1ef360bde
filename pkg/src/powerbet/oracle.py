"""Independent verification machinery.

Three kinds of oracle live here:

* exhaustive simplex grid search, enumerating exact integer compositions
  so the feasible set carries no floating-point drift,
* a stationarity / complementary-slackness residual check certifying a
  partial-investment allocation,
* seeded Monte Carlo race simulation with a counter-based generator, so
  the sample stream is a pure function of (seed, race index).

The grid argmax is deterministic: points are scanned in lexicographic
order of their integer compositions and only strict improvements are
accepted, so the lowest lexicographic point wins ties regardless of how
the scan is chunked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import islice
from typing import Iterator

import numpy as np

from .errors import GridTooLargeError, LengthMismatchError, NotEvaluableError
from .market import RaceMarket
from .strategy import Allocation, PartialAllocation, _check_finite_beta
from .utility import utility_full, utility_partial

_LN2 = math.log(2.0)

MAX_GRID_POINTS = 10**7
_CHUNK_ROWS = 1 << 16


@dataclass(frozen=True)
class GridSpec:
    """Simplex grid: all vectors of ``dimension`` nonnegative multiples of
    ``1/resolution`` summing to one."""

    resolution: int
    dimension: int

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise GridTooLargeError(f"grid resolution must be >= 2, got {self.resolution}")
        if self.dimension < 1:
            raise GridTooLargeError(f"grid dimension must be >= 1, got {self.dimension}")

    @property
    def n_points(self) -> int:
        return math.comb(self.resolution + self.dimension - 1, self.dimension - 1)


@dataclass(frozen=True)
class KktReport:
    """Gaps in the optimality conditions of a partial-investment allocation.

    For payoffs ``s_i = cash + bets_i * o_i`` the conditions are
    ``sum_i p_i s_i^(beta-1) = mu`` when cash is held (``<= mu`` otherwise)
    and ``p_i o_i s_i^(beta-1) = mu`` for each backed horse (``<= mu`` for
    unbacked ones).  Stationarity gaps measure the equalities, feasibility
    gaps the inequality violations; all gaps are >= 0 and vanish at the
    optimum.  ``mu_gamma_gap`` additionally checks
    ``mu = gamma_cap * cash^(beta-1)`` when the threshold is supplied.
    """

    mu: float
    stationarity_gap: float
    feasibility_gap: float
    cash_stationarity_gap: float
    cash_feasibility_gap: float
    mu_gamma_gap: float | None = None


@dataclass(frozen=True)
class WealthTrajectory:
    """Cumulative log2 wealth over a seeded sequence of races."""

    n_races: int
    log_wealth: np.ndarray
    seed: int

    @property
    def final_rate(self) -> float:
        """Average log2 growth per race over the whole run."""
        return float(self.log_wealth[-1]) / self.n_races


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative ints summing to ``total``, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _composition_chunks(spec: GridSpec) -> Iterator[np.ndarray]:
    gen = _compositions(spec.resolution, spec.dimension)
    while True:
        block = list(islice(gen, _CHUNK_ROWS))
        if not block:
            return
        yield np.asarray(block, dtype=float)


def _batch_utilities(probs: np.ndarray, payoffs: np.ndarray, beta: float) -> np.ndarray:
    """Row-wise ``(1/beta) log2 sum_i p_i payoff_i^beta``, vectorized and log-domain."""
    with np.errstate(divide="ignore"):
        log_payoffs = np.log(payoffs)
    terms = np.log(probs)[None, :] + beta * log_payoffs
    peak = terms.max(axis=1)
    out = np.full(payoffs.shape[0], -math.inf)
    ok = np.isfinite(peak)
    if np.any(ok):
        rows = terms[ok] - peak[ok, None]
        out[ok] = (peak[ok] + np.log(np.exp(rows).sum(axis=1))) / (beta * _LN2)
    # peak = +inf happens only for beta < 0 with a zero payoff: utility -inf.
    # peak = -inf happens only when every payoff is zero: also -inf.
    return out


def _check_grid(grid: GridSpec, dimension: int) -> None:
    if grid.dimension != dimension:
        raise LengthMismatchError(
            f"grid dimension {grid.dimension} does not match the required {dimension}"
        )
    if grid.n_points > MAX_GRID_POINTS:
        raise GridTooLargeError(
            f"grid would enumerate {grid.n_points} points, above the {MAX_GRID_POINTS} guard"
        )


def grid_search_full(
    market: RaceMarket, beta: float, grid: GridSpec
) -> tuple[Allocation, float]:
    """Exhaustive full-investment search; returns the best grid point and its utility."""
    beta = _check_finite_beta(beta)
    _check_grid(grid, market.m)
    k = float(grid.resolution)
    best_point: np.ndarray | None = None
    best_value = -math.inf
    for block in _composition_chunks(grid):
        bets = block / k
        values = _batch_utilities(market.probs, bets * market.odds[None, :], beta)
        idx = int(np.argmax(values))
        if best_point is None or values[idx] > best_value:
            best_value = float(values[idx])
            best_point = bets[idx]
    alloc = Allocation(best_point)
    return alloc, utility_full(market, alloc, beta)


def grid_search_partial(
    market: RaceMarket, beta: float, grid: GridSpec
) -> tuple[PartialAllocation, float]:
    """Exhaustive search over (cash, bets) vectors; the cash coordinate comes first."""
    beta = _check_finite_beta(beta)
    _check_grid(grid, market.m + 1)
    k = float(grid.resolution)
    best_point: np.ndarray | None = None
    best_value = -math.inf
    for block in _composition_chunks(grid):
        points = block / k
        payoffs = points[:, :1] + points[:, 1:] * market.odds[None, :]
        values = _batch_utilities(market.probs, payoffs, beta)
        idx = int(np.argmax(values))
        if best_point is None or values[idx] > best_value:
            best_value = float(values[idx])
            best_point = points[idx]
    alloc = PartialAllocation(best_point[0], best_point[1:])
    return alloc, utility_partial(market, alloc, beta)


def kkt_residual(
    market: RaceMarket,
    beta: float,
    sol: PartialAllocation,
    gamma_cap: float | None = None,
) -> KktReport:
    """Residuals of the optimality conditions at a partial allocation.

    The multiplier is read off the cash equality when cash is held,
    otherwise off the first backed horse.  The allocation must keep cash
    or back every horse; otherwise a zero payoff makes the conditions
    unevaluable.
    """
    beta = _check_finite_beta(beta)
    if beta == 0.0 or beta >= 1.0:
        raise NotEvaluableError("the conditions are stated for finite nonzero beta < 1")
    if sol.m != market.m:
        raise NotEvaluableError(
            f"allocation covers {sol.m} horses but the market has {market.m}"
        )
    active = sol.bets > 0.0
    if sol.cash == 0.0 and not np.all(active):
        raise NotEvaluableError("needs cash > 0 or a bet on every horse")

    payoffs = sol.cash + sol.bets * market.odds
    grad_cash = float(np.sum(market.probs * payoffs ** (beta - 1.0)))
    grad_bets = market.probs * market.odds * payoffs ** (beta - 1.0)

    if sol.cash > 0.0:
        mu = grad_cash
    else:
        mu = float(grad_bets[np.flatnonzero(active)[0]])

    stationarity = float(np.max(np.abs(grad_bets[active] - mu), initial=0.0))
    feasibility = float(np.max(np.maximum(grad_bets[~active] - mu, 0.0), initial=0.0))
    if sol.cash > 0.0:
        cash_stationarity = abs(grad_cash - mu)
        cash_feasibility = 0.0
    else:
        cash_stationarity = 0.0
        cash_feasibility = max(grad_cash - mu, 0.0)

    mu_gamma_gap = None
    if gamma_cap is not None and sol.cash > 0.0:
        mu_gamma_gap = abs(mu - gamma_cap * sol.cash ** (beta - 1.0))

    return KktReport(
        mu=mu,
        stationarity_gap=stationarity,
        feasibility_gap=feasibility,
        cash_stationarity_gap=cash_stationarity,
        cash_feasibility_gap=cash_feasibility,
        mu_gamma_gap=mu_gamma_gap,
    )


def _winners(market: RaceMarket, n: int, seed: int) -> np.ndarray:
    """Inverse-CDF winner sampling from a counter-based stream."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random(n)
    cdf = np.cumsum(market.probs)
    return np.minimum(np.searchsorted(cdf, u, side="right"), market.m - 1)


def simulate_growth(
    market: RaceMarket, b: Allocation, n_races: int, seed: int
) -> WealthTrajectory:
    """Simulate repeated betting; entry ``n`` is the log2 wealth after ``n+1`` races.

    Identical (market, allocation, n, seed) inputs reproduce the trajectory
    bit for bit.  An unbacked horse winning sends the wealth to ``-inf``
    and it stays there.
    """
    if n_races < 1:
        raise NotEvaluableError(f"need at least one race, got {n_races}")
    winners = _winners(market, n_races, seed)
    with np.errstate(divide="ignore"):
        increments = np.log2(b.bets[winners] * market.odds[winners])
    return WealthTrajectory(n_races, np.cumsum(increments), seed)


def estimate_ubeta(
    market: RaceMarket, b: Allocation, beta: float, n_samples: int, seed: int
) -> float:
    """Monte Carlo estimate of ``(1/beta) log2 E[S^beta]`` from seeded samples."""
    beta = _check_finite_beta(beta)
    if beta == 0.0:
        raise NotEvaluableError("beta must be nonzero; estimate the doubling rate instead")
    if n_samples < 1:
        raise NotEvaluableError(f"need at least one sample, got {n_samples}")
    winners = _winners(market, n_samples, seed)
    payoffs = b.bets[winners] * market.odds[winners]
    if beta < 0.0 and np.any(payoffs == 0.0):
        return -math.inf
    with np.errstate(divide="ignore"):
        terms = beta * np.log(payoffs)
    peak = terms.max()
    if peak == -math.inf:
        return -math.inf
    log_mean = peak + math.log(np.exp(terms - peak).sum()) - math.log(n_samples)
    return log_mean / (beta * _LN2)
