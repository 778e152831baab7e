import numpy as np
import pytest

from pricepump import MarketState


def random_state(rng: np.random.Generator, n_agents: int) -> MarketState:
    """A positive, well-scaled random market for property tests."""
    cash = rng.uniform(0.1, 10.0, n_agents)
    return MarketState(
        price=float(rng.uniform(0.1, 100.0)),
        day=0,
        stock_value=rng.uniform(0.1, 10.0, n_agents),
        cash=cash,
        target_ratio=rng.uniform(0.05, 20.0, n_agents),
        initial_cash=cash.copy(),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(20240817))
