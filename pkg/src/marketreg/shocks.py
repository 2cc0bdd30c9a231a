"""Forced best-bid sells: the erroneous-order storm and stop-loss selling."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .agents import AgentParams, AgentState


@dataclass(frozen=True)
class ErroneousConfig:
    t_ms: int = 30000
    t_me: int = 60000
    p_m: float = 0.15

    def validate(self) -> None:
        if not 0 <= self.t_ms < self.t_me:
            raise ValueError("need 0 <= t_ms < t_me")
        if not 0.0 <= self.p_m <= 1.0:
            raise ValueError("p_m must be a probability")

    def active(self, t: int) -> bool:
        return self.t_ms <= t <= self.t_me


@dataclass(frozen=True)
class StopLossConfig:
    p_l: float = 0.35

    def validate(self) -> None:
        if not 0.0 <= self.p_l <= 1.0:
            raise ValueError("p_l must be a probability")


def maybe_convert_erroneous(cfg: ErroneousConfig, t: int, u: float) -> bool:
    """True when this turn's order becomes an erroneous best-bid sell.

    ``u`` is the turn's uniform draw on [0, 1); the window is inclusive at
    both ends.
    """
    return cfg.t_ms <= t <= cfg.t_me and u < cfg.p_m


def stop_loss_threshold(agent: AgentParams, P_f: float) -> float:
    return P_f * math.exp(agent.fair_noise) - agent.P_l


def update_stop_loss_trigger(
    agent: AgentParams, state: AgentState, mid: float, P_f: float, t: int
) -> None:
    """Start the agent's stop-loss window the first time ``mid`` falls below
    its threshold. Marks the window done once it has fully elapsed; a done
    agent never triggers again."""
    if mid <= 0:
        raise ValueError("mid must be positive")
    if state.stop_loss_started_at is None:
        if mid < stop_loss_threshold(agent, P_f):
            state.stop_loss_started_at = t
    elif not state.stop_loss_done and t >= state.stop_loss_started_at + agent.t_l:
        state.stop_loss_done = True


def stop_loss_probability(agent: AgentParams, state: AgentState, t: int, p_l: float) -> float:
    """Linearly decaying conversion probability inside the stop-loss window."""
    t_ls = state.stop_loss_started_at
    if t_ls is None:
        raise RuntimeError("stop-loss probability requested before the trigger fired")
    if t < t_ls:
        raise ValueError(f"t={t} precedes the stop-loss start {t_ls}")
    p = p_l * (t_ls + agent.t_l - t) / agent.t_l
    return min(max(p, 0.0), p_l)
