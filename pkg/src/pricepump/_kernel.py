"""Compiled inner loop for whole-trajectory simulation.

Mirrors the semantics of ``market.trading_round`` exactly, including the
order in which random draws are consumed (subset size first under the
uniform mode, then one bounded integer per Fisher-Yates slot), so a
trajectory produced here matches one produced by composing the public
operations round by round. numba reproduces numpy's Generator bit streams,
which makes that equivalence hold draw for draw.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def simulate_path(
    rng,
    stock: np.ndarray,
    cash: np.ndarray,
    target: np.ndarray,
    initial_cash: np.ndarray,
    n_days: int,
    trades_per_day: int,
    m_min: int,
    m_max: int,
    alpha: float,
    beta: float,
    flat_tol: float,
    q_threshold: float,
    r_threshold: float,
    price0: float,
):
    """Run one trajectory in place; returns per-day records and a failure day.

    The failure day is -1 when the whole horizon completed; otherwise it is
    the day on which the clearing denominator underflowed, and the per-day
    arrays are only valid strictly before it.
    """
    n = stock.shape[0]
    price = np.empty(n_days)
    log_return = np.empty(n_days)
    volume_cash_fraction = np.empty(n_days)
    volume_shares = np.empty(n_days)
    q_proportion = np.empty(n_days)
    r_proportion = np.empty(n_days)

    idx = np.empty(n, dtype=np.int64)
    p = price0
    total_cash = 0.0
    for i in range(n):
        total_cash += cash[i]

    for day in range(n_days):
        p_prev = p
        vc_day = 0.0
        vs_day = 0.0
        for _ in range(trades_per_day):
            if m_min == m_max:
                m = m_min
            else:
                m = int(rng.integers(m_min, m_max + 1))
            for i in range(n):
                idx[i] = i
            for j in range(m):
                r = int(rng.integers(j, n))
                tmp = idx[j]
                idx[j] = idx[r]
                idx[r] = tmp

            numer = 0.0
            denom = 0.0
            for j in range(m):
                a = idx[j]
                numer += target[a] * cash[a] / (1.0 + target[a])
                denom += stock[a] / (1.0 + target[a])
            if not np.isfinite(denom) or denom <= 1e-300:
                return (price, log_return, volume_cash_fraction, volume_shares,
                        q_proportion, r_proportion, day)
            ratio = numer / denom
            if not np.isfinite(ratio) or ratio <= 0.0:
                return (price, log_return, volume_cash_fraction, volume_shares,
                        q_proportion, r_proportion, day)
            p_new = p * ratio

            for i in range(n):
                stock[i] *= ratio

            vc_round = 0.0
            for j in range(m):
                a = idx[j]
                s_marked = stock[a]  # pre-trade stock, already at the new price
                b_pre = cash[a]
                if m > 1:
                    x = (target[a] * b_pre - s_marked) / (1.0 + target[a])
                    stock[a] = s_marked + x
                    cash[a] = b_pre - x
                    if x > 0.0:
                        vc_round += x
                realized = s_marked / b_pre
                rel = realized / target[a] - 1.0
                if rel > flat_tol:
                    target[a] *= alpha
                elif rel < -flat_tol:
                    target[a] *= beta
            vc_day += vc_round
            vs_day += vc_round / p_new
            p = p_new

        q_count = 0
        r_count = 0
        for i in range(n):
            if cash[i] < q_threshold * stock[i]:
                q_count += 1
            if cash[i] < r_threshold * initial_cash[i]:
                r_count += 1
        price[day] = p
        log_return[day] = np.log(p / p_prev)
        volume_cash_fraction[day] = vc_day / total_cash
        volume_shares[day] = vs_day
        q_proportion[day] = q_count / n
        r_proportion[day] = r_count / n

    return (price, log_return, volume_cash_fraction, volume_shares,
            q_proportion, r_proportion, -1)
