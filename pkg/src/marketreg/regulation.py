"""Price limits and the circuit breaker.

Both mechanisms compare against the mid price ``tr`` steps earlier and a
half-width ``pr``. The price limit rewrites (or, in version two, drops)
orders outside the band; the breaker halts all order entry and
cancellation for ``tr2`` steps once the mid leaves the band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .orderbook import BUY, SELL, price_to_ticks

NONE = "none"
PRICE_LIMIT = "price_limit"
PRICE_LIMIT_V2 = "price_limit_v2"
CIRCUIT_BREAKER = "circuit_breaker"
KINDS = (NONE, PRICE_LIMIT, PRICE_LIMIT_V2, CIRCUIT_BREAKER)

# config-file spellings
ALIASES = {
    "none": NONE,
    "limit": PRICE_LIMIT,
    "limit_v2": PRICE_LIMIT_V2,
    "breaker": CIRCUIT_BREAKER,
    PRICE_LIMIT: PRICE_LIMIT,
    PRICE_LIMIT_V2: PRICE_LIMIT_V2,
    CIRCUIT_BREAKER: CIRCUIT_BREAKER,
}
SHORT_NAMES = {NONE: "none", PRICE_LIMIT: "limit", PRICE_LIMIT_V2: "limit_v2", CIRCUIT_BREAKER: "breaker"}


@dataclass(frozen=True)
class RegulationConfig:
    kind: str = NONE
    tr: int = 10000
    pr: float = 100.0
    tr2: int | None = None  # defaults to tr

    def __post_init__(self):
        object.__setattr__(self, "kind", ALIASES.get(self.kind, self.kind))
        if self.kind not in KINDS:
            raise ValueError(f"unknown regulation kind {self.kind!r}")
        if self.tr < 1:
            raise ValueError("tr must be >= 1")
        if not self.pr > 0:
            raise ValueError("pr must be positive")
        if self.tr2 is not None and self.tr2 < 1:
            raise ValueError("tr2 must be >= 1")

    @property
    def halt_length(self) -> int:
        return self.tr if self.tr2 is None else self.tr2


class PriceHistory:
    """Mid prices indexed by time; slot 0 holds the initial mid."""

    def __init__(self, initial_mid: float, capacity: int = 0):
        self.mids = [float(initial_mid)]
        if capacity:
            self.mids.extend([float(initial_mid)] * capacity)
        self._recorded = 0

    def record(self, t: int, mid: float) -> None:
        if t != self._recorded + 1:
            raise ValueError(f"history must be recorded once per step (expected t={self._recorded + 1}, got {t})")
        if t < len(self.mids):
            self.mids[t] = mid
        else:
            self.mids.append(mid)
        self._recorded = t

    def __getitem__(self, t: int) -> float:
        return self.mids[t]


def reference_price(history: PriceHistory | list[float], t: int, tr: int) -> float:
    """Mid at ``t - tr``; the initial mid while ``t < tr``."""
    if tr < 1:
        raise ValueError("tr must be >= 1")
    return history[t - tr] if t >= tr else history[0]


def band_ticks(ref: float, pr: float, tick: float) -> tuple[int, int]:
    """Lower and upper limit prices in ticks (lower rounded up, upper down).

    An unbounded band (``pr`` infinite) maps to (0, huge)."""
    if math.isinf(pr):
        return 0, 1 << 62
    lower = ref - pr
    lo = price_to_ticks(lower, SELL, tick) if lower > 0 else 0
    return lo, price_to_ticks(ref + pr, BUY, tick)


def _to_ticks(price: float, tick: float) -> int:
    return round(price / tick)


def apply_price_limit(order: tuple[str, float], ref: float, pr: float, tick: float = 0.01) -> tuple[str, float]:
    """Clamp a sell below ``ref - pr`` up to the lower limit and a buy above
    ``ref + pr`` down to the upper limit."""
    side, price = order
    lo, hi = band_ticks(ref, pr, tick)
    p = _to_ticks(price, tick)
    if side == SELL and p < lo:
        return side, lo * tick
    if side == BUY and p > hi:
        return side, hi * tick
    return side, price


def apply_price_limit_v2(order: tuple[str, float], ref: float, pr: float, tick: float = 0.01) -> tuple[str, float] | None:
    """Drop orders that the price limit would have clamped."""
    side, price = order
    lo, hi = band_ticks(ref, pr, tick)
    p = _to_ticks(price, tick)
    if (side == SELL and p < lo) or (side == BUY and p > hi):
        return None
    return order


@dataclass
class CircuitBreakerState:
    halted_until: int | None = None
    n_triggers: int = 0


def is_halted(state: CircuitBreakerState, t: int) -> bool:
    return state.halted_until is not None and t < state.halted_until


def check_circuit_trigger(
    state: CircuitBreakerState, mid: float, ref: float, pr: float, t: int, tr2: int
) -> bool:
    """Start a halt of ``tr2`` steps if ``mid`` is strictly outside the band."""
    if is_halted(state, t):
        raise RuntimeError("breaker checked while already halted")
    if mid < ref - pr or mid > ref + pr:
        state.halted_until = t + tr2
        state.n_triggers += 1
        return True
    return False
