"""Fundamentalist/chartist/noise agents and their order formation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .orderbook import BUY, SELL, price_to_ticks


@dataclass(frozen=True)
class AgentMaxima:
    w1_max: float = 1.0
    w2_max: float = 10.0
    w3_max: float = 1.0
    tau_max: int = 10000
    pl_min: float = 1000.0
    pl_max: float = 3000.0
    tl_min: int = 10000
    tl_max: int = 100000

    def validate(self) -> None:
        if min(self.w1_max, self.w2_max, self.w3_max) <= 0:
            raise ValueError("strategy weight maxima must be positive")
        if self.tau_max < 1:
            raise ValueError("tau_max must be >= 1")
        if not 0 < self.pl_min < self.pl_max:
            raise ValueError("need 0 < pl_min < pl_max")
        if not 0 < self.tl_min < self.tl_max:
            raise ValueError("need 0 < tl_min < tl_max")


@dataclass(frozen=True)
class AgentParams:
    w1: float
    w2: float
    w3: float
    tau: int
    fair_noise: float
    P_l: float
    t_l: int


@dataclass
class AgentState:
    stop_loss_started_at: int | None = None
    stop_loss_done: bool = False


@dataclass(frozen=True)
class Population:
    """Column-wise agent parameters; indexing yields :class:`AgentParams`."""

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    tau: np.ndarray
    fair_noise: np.ndarray
    P_l: np.ndarray
    t_l: np.ndarray

    def __len__(self) -> int:
        return len(self.w1)

    def __getitem__(self, j: int) -> AgentParams:
        return AgentParams(
            float(self.w1[j]), float(self.w2[j]), float(self.w3[j]), int(self.tau[j]),
            float(self.fair_noise[j]), float(self.P_l[j]), int(self.t_l[j]),
        )

    def __iter__(self) -> Iterator[AgentParams]:
        return (self[j] for j in range(len(self)))

    def stop_loss_thresholds(self, P_f: float) -> np.ndarray:
        """Mid price below which each agent starts placing stop-loss orders."""
        return P_f * np.exp(self.fair_noise) - self.P_l


def noise_std(sigma: float, sigma_is_variance: bool = False) -> float:
    return math.sqrt(sigma) if sigma_is_variance else sigma


def init_agents(
    n: int,
    maxima: AgentMaxima,
    sigma_eps: float,
    rng: np.random.Generator,
    sigma_is_variance: bool = False,
) -> Population:
    """Draw ``n`` independent agents.

    Weights are uniform on ``(0, w_max)``, the chartist horizon and the
    stop-loss window are uniform integers on their closed ranges, and the
    initial fair-price noise is normal with scale ``sigma_eps`` (treated as
    a standard deviation unless ``sigma_is_variance``).
    """
    if n <= 0:
        raise ValueError("n must be positive")
    maxima.validate()
    if sigma_eps < 0:
        raise ValueError("sigma_eps must be non-negative")
    w1 = rng.uniform(0.0, maxima.w1_max, n)
    w2 = rng.uniform(0.0, maxima.w2_max, n)
    w3 = rng.uniform(0.0, maxima.w3_max, n)
    tau = rng.integers(1, maxima.tau_max, n, endpoint=True)
    fair_noise = rng.normal(0.0, noise_std(sigma_eps, sigma_is_variance), n)
    P_l = rng.uniform(maxima.pl_min, maxima.pl_max, n)
    t_l = rng.integers(maxima.tl_min, maxima.tl_max, n, endpoint=True)
    return Population(w1, w2, w3, tau, fair_noise, P_l, t_l)


def expected_return(
    agent: AgentParams,
    P_f: float,
    P_prev: float,
    P_past: float | None,
    eps: float,
    t: int,
) -> float:
    """Weighted mix of fundamental, chartist and noise log-returns.

    ``P_past`` is the mid ``tau + 1`` steps back; the chartist term is
    dropped when that mid does not exist yet (``t <= tau``) or is None.
    """
    if P_prev <= 0 or P_f <= 0:
        raise ValueError("prices must be positive")
    w1, w2, w3 = agent.w1, agent.w2, agent.w3
    total = w1 * math.log(P_f / P_prev) + w3 * eps
    if P_past is not None and t > agent.tau:
        if P_past <= 0:
            raise ValueError("prices must be positive")
        total += w2 * math.log(P_prev / P_past)
    return total / (w1 + w2 + w3)


def order_price_and_side(
    r: float,
    P_prev: float,
    P_d: float,
    t: int,
    t_c: int,
    P_f: float,
    rho: float,
    tick: float,
    rng: np.random.Generator | None = None,
) -> tuple[int, str]:
    """Scatter an order price around the expected price and pick a side.

    ``rho`` is the uniform draw on [0, 1) placing the price inside
    ``(P_e - P_d, P_e + P_d)``. Before ``t_c`` the side is decided against
    ``P_f`` instead of the expected price. Returns the tick-rounded price
    (in ticks) and the side. An exact tie re-draws ``rho`` from ``rng``.
    """
    if P_prev <= 0 or P_d <= 0:
        raise ValueError("P_prev and P_d must be positive")
    P_e = P_prev * math.exp(r)
    anchor = P_f if t < t_c else P_e
    while True:
        P_o = P_e + P_d * (2.0 * rho - 1.0)
        if P_o != anchor:
            break
        if rng is None:
            rng = np.random.default_rng(t)
        rho = rng.random()
    side = BUY if anchor > P_o else SELL
    if P_o <= 0:
        # only reachable after a total collapse; a one-tick order keeps the side
        return 1, side
    return price_to_ticks(P_o, side, tick), side
