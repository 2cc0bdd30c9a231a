"""Continuous double auction for one-share limit orders.

Prices are held internally as integer tick counts so that level comparison
and binning are exact. The public methods accept and return prices in price
units (ticks times the tick size).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

BUY = "buy"
SELL = "sell"

# heap keys pack (price, sequence) into one int: price * _KEY + seq
_KEY = 1 << 32
_SEQ_MASK = _KEY - 1


def _check_side(side: str) -> None:
    if side not in (BUY, SELL):
        raise ValueError(f"side must be 'buy' or 'sell', got {side!r}")


def price_to_ticks(price: float, side: str, tick: float) -> int:
    """Convert a raw price to ticks, flooring buys and ceiling sells."""
    if price <= 0 or tick <= 0:
        raise ValueError(f"price and tick must be positive (price={price}, tick={tick})")
    _check_side(side)
    x = price / tick
    eps = 1e-9 + 1e-12 * abs(x)
    if side == BUY:
        return math.floor(x + eps)
    return math.ceil(x - eps)


def round_to_tick(price: float, side: str, tick: float) -> float:
    """Round a buy price down / a sell price up to a multiple of ``tick``."""
    return price_to_ticks(price, side, tick) * tick


@dataclass(frozen=True)
class Order:
    id: int
    agent_id: int
    side: str
    price: float
    placed_at: int
    shares: int = 1

    def __post_init__(self):
        _check_side(self.side)
        if self.shares != 1:
            raise ValueError("orders are always for exactly one share")


@dataclass(frozen=True)
class Trade:
    time: int
    price: float
    buy_agent: int
    sell_agent: int


class OrderBook:
    """Two-sided book with price-time priority and age-based cancellation.

    Each side is a binary heap with lazy deletion: expired or executed
    orders are flagged dead and discarded when they reach the top. Orders
    must arrive with non-decreasing ``placed_at`` so that expiry can sweep
    a single pointer through submission order.
    """

    def __init__(self, tick: float = 0.01, initial_mid: float = 10000.0):
        if tick <= 0:
            raise ValueError("tick must be positive")
        self.tick = tick
        self.last_mid = float(initial_mid)

        # per resting order, indexed by sequence number
        self._price: list[int] = []
        self._is_buy: list[bool] = []
        self._agent: list[int] = []
        self._placed: list[int] = []
        self._stamp: list[int] = []  # expiry clock at placement
        self._order_id: list[int] = []
        self._alive: list[bool] = []

        self._bids: list[int] = []
        self._asks: list[int] = []
        self.n_bids = 0
        self.n_asks = 0
        self._expire_ptr = 0
        self._last_placed = -math.inf

        # trade log, parallel columns
        self.trade_time: list[int] = []
        self.trade_price: list[int] = []
        self.trade_buyer: list[int] = []
        self.trade_seller: list[int] = []

        self.n_submitted = 0
        self.n_executed = 0
        self.n_cancelled = 0

    # -- top of book ---------------------------------------------------

    def best_bid_ticks(self) -> int | None:
        bids, alive = self._bids, self._alive
        while bids:
            seq = bids[0] & _SEQ_MASK
            if alive[seq]:
                return self._price[seq]
            heapq.heappop(bids)
        return None

    def best_ask_ticks(self) -> int | None:
        asks, alive = self._asks, self._alive
        while asks:
            seq = asks[0] & _SEQ_MASK
            if alive[seq]:
                return self._price[seq]
            heapq.heappop(asks)
        return None

    @property
    def best_bid(self) -> float | None:
        b = self.best_bid_ticks()
        return None if b is None else b * self.tick

    @property
    def best_ask(self) -> float | None:
        a = self.best_ask_ticks()
        return None if a is None else a * self.tick

    def mid_price(self) -> float:
        """Mean of best bid and best ask.

        Falls back to the last computable mid when a side is empty, and to
        the initial mid (the fundamental value) before any mid existed.
        """
        if self.n_bids and self.n_asks:
            self.last_mid = (self.best_bid_ticks() + self.best_ask_ticks()) * 0.5 * self.tick
        return self.last_mid

    def __len__(self) -> int:
        return self.n_bids + self.n_asks

    # -- order entry ---------------------------------------------------

    def place(self, is_buy: bool, price: int, agent_id: int, t: int, order_id: int = -1,
              stamp: int | None = None) -> int:
        """Submit a one-share order priced in ticks.

        ``stamp`` is the value of the expiry clock that :meth:`cancel_expired`
        compares against; it defaults to ``t``. Returns the execution price
        in ticks, or -1 if the order rested.
        """
        if stamp is None:
            stamp = t
        if stamp < self._last_placed:
            raise ValueError(f"orders must arrive in time order ({stamp} < {self._last_placed})")
        self._last_placed = stamp
        self.n_submitted += 1
        if is_buy:
            best = self.best_ask_ticks() if self.n_asks else None
            if best is not None and price >= best:
                seq = heapq.heappop(self._asks) & _SEQ_MASK
                self._alive[seq] = False
                self.n_asks -= 1
                self._record_trade(t, best, agent_id, self._agent[seq])
                return best
        else:
            best = self.best_bid_ticks() if self.n_bids else None
            if best is not None and price <= best:
                seq = heapq.heappop(self._bids) & _SEQ_MASK
                self._alive[seq] = False
                self.n_bids -= 1
                self._record_trade(t, best, self._agent[seq], agent_id)
                return best

        seq = len(self._price)
        self._price.append(price)
        self._is_buy.append(is_buy)
        self._agent.append(agent_id)
        self._placed.append(t)
        self._stamp.append(stamp)
        self._order_id.append(order_id if order_id >= 0 else seq)
        self._alive.append(True)
        if is_buy:
            heapq.heappush(self._bids, -price * _KEY + seq)
            self.n_bids += 1
        else:
            heapq.heappush(self._asks, price * _KEY + seq)
            self.n_asks += 1
        return -1

    def _record_trade(self, t: int, price: int, buyer: int, seller: int) -> None:
        self.n_executed += 1
        self.trade_time.append(t)
        self.trade_price.append(price)
        self.trade_buyer.append(buyer)
        self.trade_seller.append(seller)

    def submit_limit_order(self, order: Order) -> list[Trade]:
        """Match ``order`` against the opposite side or rest it.

        The order price must already be tick-aligned. A crossing order
        trades once at the resting order's price.
        """
        is_buy = order.side == BUY
        ticks = round(order.price / self.tick)
        if abs(order.price / self.tick - ticks) > 1e-6:
            raise ValueError(f"order price {order.price} is not a multiple of tick {self.tick}")
        px = self.place(is_buy, ticks, order.agent_id, order.placed_at, order.id)
        if px < 0:
            return []
        return [Trade(order.placed_at, px * self.tick, self.trade_buyer[-1], self.trade_seller[-1])]

    def cancel_expired(self, now: int, t_c: int) -> int:
        """Cancel every resting order stamped at or before ``now - t_c``."""
        cutoff = now - t_c
        ptr = self._expire_ptr
        placed, alive, is_buy = self._stamp, self._alive, self._is_buy
        end = len(placed)
        count = 0
        while ptr < end and placed[ptr] <= cutoff:
            if alive[ptr]:
                alive[ptr] = False
                if is_buy[ptr]:
                    self.n_bids -= 1
                else:
                    self.n_asks -= 1
                count += 1
            ptr += 1
        self._expire_ptr = ptr
        self.n_cancelled += count
        return count

    # -- inspection ----------------------------------------------------

    def resting_orders(self) -> list[Order]:
        """Live orders in submission order."""
        tick = self.tick
        return [
            Order(self._order_id[i], self._agent[i], BUY if self._is_buy[i] else SELL,
                  self._price[i] * tick, self._placed[i])
            for i in range(self._expire_ptr, len(self._price))
            if self._alive[i]
        ]

    def trades(self) -> list[Trade]:
        tick = self.tick
        return [
            Trade(t, p * tick, b, s)
            for t, p, b, s in zip(self.trade_time, self.trade_price, self.trade_buyer, self.trade_seller)
        ]

    def snapshot_bins(
        self, bin_width: float = 20.0, window: tuple[float, float] | None = None
    ) -> list[tuple[float, float, int, int]]:
        """Aggregate resting shares into price bins.

        Returns ``(bin_low, bin_high, sell_shares, buy_shares)`` rows for
        non-empty bins, highest price first. ``window`` keeps only bins
        lying inside ``[low, high]``.
        """
        if bin_width <= 0:
            raise ValueError("bin_width must be positive")
        width = round(bin_width / self.tick)
        if width < 1 or abs(width * self.tick - bin_width) > 1e-9 * bin_width:
            raise ValueError("bin_width must be a positive multiple of the tick")
        sells: dict[int, int] = {}
        buys: dict[int, int] = {}
        for i in range(self._expire_ptr, len(self._price)):
            if not self._alive[i]:
                continue
            b = self._price[i] // width
            counts = buys if self._is_buy[i] else sells
            counts[b] = counts.get(b, 0) + 1
        rows = []
        for b in sorted(set(sells) | set(buys), reverse=True):
            low, high = b * width * self.tick, (b + 1) * width * self.tick
            if window is not None and (low < window[0] - 1e-9 or high > window[1] + 1e-9):
                continue
            rows.append((low, high, sells.get(b, 0), buys.get(b, 0)))
        return rows


def write_snapshot_csv(rows, path) -> None:
    """Write snapshot rows as ``bin_low,bin_high,sell_shares,buy_shares``."""
    with open(path, "w") as fh:
        fh.write("bin_low,bin_high,sell_shares,buy_shares\n")
        for low, high, s, b in rows:
            fh.write(f"{low:g},{high:g},{s},{b}\n")
