"""Agent-based simulation of price limits versus circuit breakers.

A continuous double auction driven by fundamentalist/chartist/noise agents,
hit by erroneous best-bid sells and stop-loss selling, under one of three
regulations. See :func:`run_simulation` and :func:`run_sweep`.
"""

from .agents import AgentMaxima, AgentParams, AgentState, Population, expected_return, init_agents, order_price_and_side
from .config import SimConfig, load_config
from .engine import RunResult, Simulation, agent_turn, read_trace, run_simulation, write_trace
from .harness import (
    AggregateCell,
    SweepResult,
    SweepSpec,
    emit_tables,
    emit_trajectories,
    run_sweep,
    validate_stylized_facts,
)
from .orderbook import BUY, SELL, Order, OrderBook, Trade, round_to_tick
from .regulation import (
    CIRCUIT_BREAKER,
    NONE,
    PRICE_LIMIT,
    PRICE_LIMIT_V2,
    CircuitBreakerState,
    PriceHistory,
    RegulationConfig,
    apply_price_limit,
    apply_price_limit_v2,
    check_circuit_trigger,
    is_halted,
    reference_price,
)
from .shocks import ErroneousConfig, StopLossConfig, maybe_convert_erroneous, stop_loss_probability, update_stop_loss_trigger
from .stats import (
    autocorr_squared_returns,
    condition_predicates,
    estimate_falling_speed,
    excess_kurtosis,
    falling_depth,
    log_returns,
    volatility,
)

__version__ = "0.1.0"
