"""Random-instance generators shared by the test modules.

All generators take an explicit numpy Generator so every test controls its
own seed and stays reproducible.
"""

from __future__ import annotations

import numpy as np

from powerbet import Allocation, ConditionalAllocation, PartialAllocation, RaceMarket
from powerbet import SideInfoMarket, new_race, new_side_info, track_constant


def random_market(rng, m, odds_lo=1.2, odds_hi=8.0) -> RaceMarket:
    probs = rng.dirichlet(np.ones(m)) * 0.9 + 0.1 / m
    odds = rng.uniform(odds_lo, odds_hi, size=m)
    return new_race(probs / probs.sum(), odds)


def random_subfair_market(rng, m, odds_lo=1.2, odds_hi=8.0) -> RaceMarket:
    market = random_market(rng, m, odds_lo, odds_hi)
    c = track_constant(market)
    if c < 0.98:
        return market
    # shrink all payouts until the track keeps a real cut
    scale = rng.uniform(0.55, 0.9) / c
    return new_race(market.probs, market.odds * scale)


def random_superfair_market(rng, m, odds_lo=1.2, odds_hi=8.0) -> RaceMarket:
    market = random_market(rng, m, odds_lo, odds_hi)
    c = track_constant(market)
    if c >= 1.0:
        return market
    scale = rng.uniform(1.0, 1.5) / c
    return new_race(market.probs, market.odds * scale)


def random_interior_allocation(rng, m, floor=0.05) -> Allocation:
    raw = rng.dirichlet(np.ones(m))
    bets = (raw + floor) / (1.0 + m * floor)
    return Allocation(bets)


def random_partial_allocation(rng, m) -> PartialAllocation:
    raw = rng.dirichlet(np.ones(m + 1))
    return PartialAllocation(raw[0], raw[1:])


def random_pmf(rng, n, floor=0.0) -> np.ndarray:
    raw = rng.dirichlet(np.ones(n))
    if floor:
        raw = (raw + floor) / (1.0 + n * floor)
    return raw


def random_joint_market(rng, n_signals, n_horses, positive_marginals=False) -> SideInfoMarket:
    joint = rng.dirichlet(np.ones(n_signals * n_horses)).reshape(n_signals, n_horses)
    if positive_marginals:
        joint = (joint + 0.01) / (1.0 + 0.01 * joint.size)
    odds = rng.uniform(1.2, 8.0, size=n_horses)
    return new_side_info(joint, odds)


def random_conditional_allocation(rng, n_signals, n_horses, floor=0.05) -> ConditionalAllocation:
    rows = [random_interior_allocation(rng, n_horses, floor).bets for _ in range(n_signals)]
    return ConditionalAllocation(np.vstack(rows))
