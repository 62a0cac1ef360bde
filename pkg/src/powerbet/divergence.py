"""Renyi divergence, its KL limit, and a signal-averaged conditional form.

All divergences are in bits (base-2 logarithms).  Inner sums are evaluated
in the log domain (log-sum-exp) so that the extreme orders produced by
mapping a risk parameter close to 1 never overflow.

Zero-probability conventions, applied throughout:

* terms with ``p(x) = 0`` contribute nothing for every order,
* for order ``alpha > 1`` (and for KL), any ``x`` with ``p(x) > 0`` and
  ``q(x) = 0`` makes the divergence ``+inf``,
* for ``alpha`` in (0, 1), ``q(x) = 0`` terms are dropped; if this empties
  the sum entirely the divergence is ``+inf``.

Results are extended reals: finite, or ``+inf`` from support violations,
never NaN.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .errors import (
    InvalidDistributionError,
    LengthMismatchError,
    UnsupportedOrderError,
)
from .market import NORMALIZATION_TOL

_LN2 = math.log(2.0)


def _validated_pmf(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidDistributionError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise InvalidDistributionError(f"{name} entries must be finite and >= 0")
    total = arr.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidDistributionError(f"{name} sums to {total!r} instead of 1")
    return arr / total


def _check_order(alpha: float, allow_one: bool) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise UnsupportedOrderError(f"divergence order must be finite and > 0, got {alpha!r}")
    if alpha == 1.0 and not allow_one:
        raise UnsupportedOrderError(
            "the conditional divergence is defined only for orders other than 1"
        )
    return alpha


def _kl_bits(p: np.ndarray, q: np.ndarray) -> float:
    support = p > 0.0
    if np.any(q[support] == 0.0):
        return math.inf
    ps = p[support]
    return float(np.sum(ps * (np.log2(ps) - np.log2(q[support]))))


def _log_power_sum(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """Natural log of ``sum_x p(x)^alpha q(x)^(1-alpha)``, or +inf / -inf."""
    support = p > 0.0
    if alpha > 1.0 and np.any(q[support] == 0.0):
        return math.inf
    both = support & (q > 0.0)
    if not np.any(both):
        return -math.inf
    terms = alpha * np.log(p[both]) + (1.0 - alpha) * np.log(q[both])
    return float(logsumexp(terms))


def renyi_div(p, q, alpha: float) -> float:
    """Renyi divergence of order ``alpha`` between two PMFs, in bits.

    Computes ``(1/(alpha-1)) * log2 sum_x p(x)^alpha q(x)^(1-alpha)`` for
    positive ``alpha != 1``.  At ``alpha = 1`` the Kullback-Leibler limit
    ``sum_x p(x) log2(p(x)/q(x))`` is returned.
    """
    alpha = _check_order(alpha, allow_one=True)
    p = _validated_pmf(p, "p")
    q = _validated_pmf(q, "q")
    if p.shape != q.shape:
        raise LengthMismatchError(f"p has length {p.size} but q has length {q.size}")
    if alpha == 1.0:
        return _kl_bits(p, q)
    log_sum = _log_power_sum(p, q, alpha)
    if log_sum == math.inf:
        return math.inf
    if log_sum == -math.inf:
        # Disjoint supports: the divergence blows up for every order.
        return math.inf
    return log_sum / ((alpha - 1.0) * _LN2)


def _validated_cond_table(values, name: str, check_rows: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise InvalidDistributionError(f"{name} must be a 2-D table, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise InvalidDistributionError(f"{name} entries must be finite and >= 0")
    arr = arr.copy()
    for y in np.flatnonzero(check_rows):
        total = arr[y].sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidDistributionError(f"{name} row {y} sums to {total!r} instead of 1")
        arr[y] = arr[y] / total
    return arr


def cond_renyi_div(p_cond, q_cond, p_y, alpha: float) -> float:
    """Signal-averaged conditional Renyi divergence, in bits.

    ``p_cond`` and ``q_cond`` are rows-are-signals conditional tables; rows
    whose signal has zero probability are skipped entirely (their content is
    arbitrary).  The value is

        (alpha/(alpha-1)) * log2 sum_y p(y) * [sum_x p(x|y)^alpha q(x|y)^(1-alpha)]^(1/alpha)

    for positive ``alpha != 1``; order 1 is rejected because the averaged
    form has no defined limit here.  Reduces exactly to :func:`renyi_div`
    when there is a single signal.
    """
    alpha = _check_order(alpha, allow_one=False)
    p_y = _validated_pmf(p_y, "p_y")
    active = p_y > 0.0
    p_cond = _validated_cond_table(p_cond, "p_cond", active)
    q_cond = _validated_cond_table(q_cond, "q_cond", active)
    if p_cond.shape != q_cond.shape:
        raise LengthMismatchError(
            f"p_cond has shape {p_cond.shape} but q_cond has shape {q_cond.shape}"
        )
    if p_cond.shape[0] != p_y.size:
        raise LengthMismatchError(
            f"conditional tables have {p_cond.shape[0]} rows but p_y has length {p_y.size}"
        )

    outer_terms = []
    for y in np.flatnonzero(active):
        inner = _log_power_sum(p_cond[y], q_cond[y], alpha)
        if inner == math.inf:
            return math.inf
        # inner == -inf means the bracket is zero and the signal contributes 0.
        outer_terms.append(math.log(p_y[y]) + inner / alpha)
    log_outer = float(logsumexp(np.asarray(outer_terms)))
    if log_outer == -math.inf:
        return math.inf
    return (alpha / (alpha - 1.0)) * log_outer / _LN2
