"""Single-market dynamics for adaptively rebalancing traders.

Each trader holds a stock account and a cash account (both in dollars) and a
target stock-to-cash ratio. Every trading period a random subset of traders
is drawn, a clearing price is computed so that their desired cash flows into
and out of stock sum to zero, the trades are applied, and each trader who
traded adjusts the target ratio multiplicatively: up by ``alpha`` when the
market beat the target, down by ``beta`` when it fell short.

Trading conserves the total cash and the total number of shares in the
system; price growth therefore comes purely from the feedback on the target
ratios, not from money entering the market.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateMarket

# Ratio equality tolerance for the flat branch of the feedback rule. Exact
# equality is measure-zero in floating point; this keeps the branch testable
# without affecting the dynamics.
FLAT_REL_TOL = 1e-12

# Below this, the clearing denominator means every active stock position has
# underflowed to nothing.
_DENOM_FLOOR = 1e-300


class TradeSignal(enum.Enum):
    """Outcome of comparing the realized portfolio ratio to the target."""

    UP = "up"
    FLAT = "flat"
    DOWN = "down"


@dataclass(frozen=True)
class PsychoParams:
    """Multiplicative feedback factors: optimism ``alpha``, pessimism ``beta``."""

    alpha: float = 1.2
    beta: float = 0.96

    def validate(self) -> None:
        if not self.alpha > 1.0:
            raise ConfigError(f"alpha must exceed 1, got {self.alpha}")
        if not self.beta > 0.0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.beta > 1.0:
            warnings.warn(
                f"beta={self.beta} exceeds 1; the pessimism factor normally lies in (0, 1]",
                stacklevel=2,
            )


@dataclass(frozen=True)
class Fixed:
    """Draw exactly ``m`` distinct traders each period."""

    m: int


@dataclass(frozen=True)
class UniformRandom:
    """Draw the subset size uniformly from [m_min, m_max] first, then the subset."""

    m_min: int
    m_max: int


SelectionMode = Fixed | UniformRandom


def validate_mode(mode: SelectionMode, n_agents: int) -> None:
    if isinstance(mode, Fixed):
        if not 1 <= mode.m <= n_agents:
            raise ConfigError(f"active count m={mode.m} outside [1, {n_agents}]")
    elif isinstance(mode, UniformRandom):
        if not 1 <= mode.m_min <= mode.m_max <= n_agents:
            raise ConfigError(
                f"active range [{mode.m_min}, {mode.m_max}] outside [1, {n_agents}]"
            )
    else:
        raise ConfigError(f"unknown selection mode {mode!r}")


@dataclass(frozen=True)
class AgentPortfolio:
    """One trader: stock value and cash in dollars, plus the target stock-to-cash ratio."""

    stock_value: float
    cash: float
    target_ratio: float


@dataclass
class MarketState:
    """Market snapshot: price, period index, and per-agent accounts.

    Agent accounts are stored as parallel arrays (stock dollars, cash
    dollars, target ratios) indexed consistently; ``initial_cash`` is the
    day-0 cash snapshot used by the cash-drawdown exposure metric. The state
    owns its arrays and shares nothing, so it can be handed freely between
    threads or processes.
    """

    price: float
    day: int
    stock_value: np.ndarray
    cash: np.ndarray
    target_ratio: np.ndarray
    initial_cash: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.stock_value.shape[0]

    def agent(self, i: int) -> AgentPortfolio:
        return AgentPortfolio(
            float(self.stock_value[i]), float(self.cash[i]), float(self.target_ratio[i])
        )

    def agents(self) -> list[AgentPortfolio]:
        return [self.agent(i) for i in range(self.n_agents)]

    def copy(self) -> "MarketState":
        return MarketState(
            price=self.price,
            day=self.day,
            stock_value=self.stock_value.copy(),
            cash=self.cash.copy(),
            target_ratio=self.target_ratio.copy(),
            initial_cash=self.initial_cash.copy(),
        )


@dataclass
class RoundReport:
    """What happened in one trading period.

    ``flows`` is aligned with ``active``: positive entries are cash moved
    into stock (buys), negative are sells. ``volume_cash`` is the sum of the
    positive flows (half the gross two-sided flow, since flows balance);
    ``volume_shares`` is that volume at the newly cleared price.
    """

    price: float
    active: np.ndarray
    flows: np.ndarray
    volume_cash: float
    volume_shares: float


def initial_state(
    n_agents: int,
    rng: np.random.Generator,
    init_epsilon: float = 0.01,
    price: float = 1.0,
) -> MarketState:
    """Build the day-0 market: one dollar of stock and cash per agent.

    Target ratios start at 1 + u with u drawn uniformly from
    [-init_epsilon, init_epsilon]; any nonzero perturbation off the balanced
    point sets the feedback dynamics going.
    """
    if n_agents < 1:
        raise ConfigError(f"n_agents must be >= 1, got {n_agents}")
    if not 0 <= init_epsilon < 1:
        raise ConfigError(f"init_epsilon must lie in [0, 1), got {init_epsilon}")
    k = 1.0 + rng.uniform(-init_epsilon, init_epsilon, n_agents)
    cash = np.ones(n_agents)
    return MarketState(
        price=price,
        day=0,
        stock_value=np.ones(n_agents),
        cash=cash,
        target_ratio=k,
        initial_cash=cash.copy(),
    )


def desired_cash_flow(agent: AgentPortfolio, price_ratio: float) -> float:
    """Cash the agent wants to move into stock at the given price ratio.

    Solves ((price_ratio * s + x) / (b - x)) = k for x, so the post-trade
    portfolio sits exactly on the target ratio. Positive x buys stock,
    negative sells.
    """
    s, b, k = agent.stock_value, agent.cash, agent.target_ratio
    return (k * b - price_ratio * s) / (1.0 + k)


def _flows(s: np.ndarray, b: np.ndarray, k: np.ndarray, ratio: float) -> np.ndarray:
    return (k * b - ratio * s) / (1.0 + k)


def _clearing_ratio(s: np.ndarray, b: np.ndarray, k: np.ndarray) -> float:
    denom = float(np.sum(s / (1.0 + k)))
    if not np.isfinite(denom) or denom <= _DENOM_FLOOR:
        raise DegenerateMarket(
            f"active stock positions sum to {denom}; no clearing price exists"
        )
    numer = float(np.sum(k * b / (1.0 + k)))
    ratio = numer / denom
    if not np.isfinite(ratio) or ratio <= 0.0:
        raise DegenerateMarket(f"clearing produced non-positive price ratio {ratio}")
    return ratio


def clearing_price(active: list[AgentPortfolio] | tuple, p0: float) -> float:
    """Price at which the active traders' desired cash flows sum to zero."""
    if len(active) == 0:
        raise ConfigError("active set is empty")
    s = np.array([a.stock_value for a in active])
    b = np.array([a.cash for a in active])
    k = np.array([a.target_ratio for a in active])
    return p0 * _clearing_ratio(s, b, k)


def select_active(
    rng: np.random.Generator, n_agents: int, mode: SelectionMode
) -> np.ndarray:
    """Uniformly random subset of trader indices, drawn without replacement.

    Partial Fisher-Yates over a fresh index array: slot j swaps with a
    uniform draw from [j, n). Under UniformRandom the subset size is drawn
    first. The draw sequence is part of the reproducibility contract, so the
    algorithm must not change between releases.
    """
    validate_mode(mode, n_agents)
    if isinstance(mode, Fixed):
        m = mode.m
    else:
        m = int(rng.integers(mode.m_min, mode.m_max + 1))
    idx = np.arange(n_agents)
    for j in range(m):
        r = int(rng.integers(j, n_agents))
        idx[j], idx[r] = idx[r], idx[j]
    return idx[:m].copy()


def update_target_ratio(k: float, realized: float, params: PsychoParams) -> float:
    """Feedback rule: scale the target by alpha, 1, or beta per the realized ratio."""
    signal = classify_performance(k, realized)
    if signal is TradeSignal.UP:
        return params.alpha * k
    if signal is TradeSignal.DOWN:
        return params.beta * k
    return k


def classify_performance(k: float, realized: float) -> TradeSignal:
    """Compare the realized stock-to-cash ratio against the target."""
    rel = realized / k - 1.0
    if rel > FLAT_REL_TOL:
        return TradeSignal.UP
    if rel < -FLAT_REL_TOL:
        return TradeSignal.DOWN
    return TradeSignal.FLAT


def apply_trades(state: MarketState, active: np.ndarray, price: float) -> MarketState:
    """Apply the clearing trades and mark every position to the new price.

    Active agents end exactly on their target ratios; inactive agents only
    have their stock value restated at the new price (cash untouched). Total
    cash and total shares are conserved.
    """
    ratio = price / state.price
    new = state.copy()
    new.price = price
    new.day = state.day + 1
    new.stock_value *= ratio
    if active.shape[0] > 1:
        x = _flows(state.stock_value[active], state.cash[active], state.target_ratio[active], ratio)
        new.stock_value[active] += x
        new.cash[active] -= x
    # A lone trader has no counterparty: the price absorbs the imbalance and
    # the flow is identically zero.
    return new


def trading_round(
    state: MarketState,
    params: PsychoParams,
    rng: np.random.Generator,
    mode: SelectionMode,
) -> tuple[MarketState, RoundReport]:
    """One full trading period: draw, clear, trade, update targets.

    Only the agents who traded re-evaluate their targets; the comparison uses
    the realized ratio (new price over old, times the pre-trade portfolio
    ratio) against the target they traded at.
    """
    active = select_active(rng, state.n_agents, mode)
    s_a = state.stock_value[active]
    b_a = state.cash[active]
    k_a = state.target_ratio[active]

    ratio = _clearing_ratio(s_a, b_a, k_a)
    price = state.price * ratio

    if active.shape[0] > 1:
        x = _flows(s_a, b_a, k_a, ratio)
    else:
        x = np.zeros(1)

    new = state.copy()
    new.price = price
    new.day = state.day + 1
    new.stock_value *= ratio
    new.stock_value[active] += x
    new.cash[active] -= x

    realized = ratio * s_a / b_a
    rel = realized / k_a - 1.0
    factors = np.where(rel > FLAT_REL_TOL, params.alpha, np.where(rel < -FLAT_REL_TOL, params.beta, 1.0))
    new.target_ratio[active] = k_a * factors

    volume_cash = float(x[x > 0.0].sum())
    report = RoundReport(
        price=price,
        active=active,
        flows=x,
        volume_cash=volume_cash,
        volume_shares=volume_cash / price,
    )
    return new, report
