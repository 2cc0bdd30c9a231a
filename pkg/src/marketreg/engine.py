"""The main simulation loop.

One agent acts per time step, round-robin. Every random quantity an agent
could need at step ``t`` is drawn up front into per-step tables, so a run's
draws depend only on the seed and not on which branch each turn takes;
changing regulation parameters therefore leaves the random number table
untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import AgentState, Population, init_agents, noise_std
from .config import SimConfig, config_hash, to_flat
from .orderbook import BUY, SELL, Order, OrderBook, price_to_ticks
from .regulation import (
    CIRCUIT_BREAKER,
    NONE,
    PRICE_LIMIT,
    PRICE_LIMIT_V2,
    band_ticks,
)

# how a turn's order came about
NORMAL = "normal"
ERRONEOUS = "erroneous"
STOP_LOSS = "stop_loss"


@dataclass
class RunResult:
    config: SimConfig
    mids: np.ndarray  # mids[t - 1] is the mid after step t
    falling_depth: float
    min_mid_time: int
    trade_time: np.ndarray = field(repr=False)
    trade_price: np.ndarray = field(repr=False)
    trade_buyer: np.ndarray = field(repr=False)
    trade_seller: np.ndarray = field(repr=False)
    snapshots: dict[int, list[tuple[float, float, int, int]]] = field(default_factory=dict, repr=False)
    halt_starts: list[int] = field(default_factory=list, repr=False)
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def P_f(self) -> float:
        return self.config.P_f

    def mid_at(self, t: int) -> float:
        """Mid after step ``t``; ``t = 0`` is the initial mid."""
        return self.config.P_f if t == 0 else float(self.mids[t - 1])

    def mids_with_initial(self) -> np.ndarray:
        return np.concatenate(([self.config.P_f], self.mids))


def spawn_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent generators for agent init, per-step draws and tie breaks."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.Generator(np.random.PCG64(c)) for c in children)


class Simulation:
    """State of one run. Use :func:`run_simulation` unless stepping by hand."""

    def __init__(self, cfg: SimConfig):
        cfg.validate()
        self.cfg = cfg
        init_rng, step_rng, self._tie_rng = spawn_streams(cfg.seed)
        self.agents: Population = init_agents(
            cfg.n, cfg.maxima, cfg.sigma_eps, init_rng, cfg.sigma_is_variance)

        size = cfg.t_e + 1
        std = noise_std(cfg.sigma_eps, cfg.sigma_is_variance)
        self._eps = (step_rng.standard_normal(size) * std).tolist()
        self._rho = step_rng.random(size).tolist()
        self._u_err = step_rng.random(size).tolist()
        self._u_stop = step_rng.random(size).tolist()

        self.book = OrderBook(cfg.tick, cfg.P_f)
        self.mids = [cfg.P_f] * size
        self.t = 0

        ag = self.agents
        self._w1 = ag.w1.tolist()
        self._w2 = ag.w2.tolist()
        self._wsum = (ag.w1 + ag.w2 + ag.w3).tolist()
        self._w3 = ag.w3.tolist()
        self._tau = ag.tau.tolist()
        self._t_l = ag.t_l.tolist()
        thresholds = ag.stop_loss_thresholds(cfg.P_f)
        # agents ordered by threshold, highest first: a falling mid crosses them in this order
        self._sl_order = np.argsort(-thresholds, kind="stable").tolist()
        self._sl_thresh = thresholds.tolist()
        self._sl_ptr = 0
        self._sl_start = [-1] * cfg.n

        reg = cfg.regulation
        self._halted_until = 0
        self._clock = 0  # expiry clock; skips halted steps when halt_pauses_expiry
        self.halt_starts: list[int] = []
        self.snapshots: dict[int, list] = {}
        self._snapshot_times = set(cfg.snapshot_times)
        self.counts = {
            "halted_turns": 0, "erroneous": 0, "stop_loss": 0,
            "discarded_no_bid": 0, "v2_dropped": 0,
        }
        self._kind = reg.kind
        self._reg_from = cfg.regulation_from

    # -- state views ---------------------------------------------------

    def agent_state(self, j: int) -> AgentState:
        """Stop-loss state of agent ``j`` (0-based) as of the current step."""
        start = self._sl_start[j]
        if start < 0:
            return AgentState()
        return AgentState(start, self.t >= start + self._t_l[j])

    def reference_price(self, t: int) -> float:
        tr = self.cfg.regulation.tr
        return self.mids[t - tr] if t >= tr else self.mids[0]

    def is_halted(self, t: int) -> bool:
        return t < self._halted_until

    # -- one turn ------------------------------------------------------

    def _forced_sell(self, t: int, j: int) -> str | None:
        """Which shock, if any, converts agent ``j``'s order at step ``t``."""
        err = self.cfg.erroneous
        if err.t_ms <= t <= err.t_me and self._u_err[t] < err.p_m:
            return ERRONEOUS
        start = self._sl_start[j]
        if start >= 0:
            t_l = self._t_l[j]
            remaining = start + t_l - t
            if remaining > 0 and self._u_stop[t] * t_l < self.cfg.stop_loss.p_l * remaining:
                return STOP_LOSS
        return None

    def _normal_order(self, t: int, j: int) -> tuple[bool, int]:
        cfg = self.cfg
        mids = self.mids
        P_prev = mids[t - 1]
        r = self._w1[j] * math.log(cfg.P_f / P_prev) + self._w3[j] * self._eps[t]
        past = t - self._tau[j] - 1
        if past >= 0:
            r += self._w2[j] * math.log(P_prev / mids[past])
        r /= self._wsum[j]
        P_e = P_prev * math.exp(r)
        anchor = cfg.P_f if t < cfg.t_c else P_e
        rho = self._rho[t]
        while True:
            P_o = P_e + cfg.P_d * (2.0 * rho - 1.0)
            if P_o != anchor:
                break
            rho = self._tie_rng.random()
        if anchor > P_o:
            return True, price_to_ticks(P_o, BUY, cfg.tick) if P_o > 0 else 1
        return False, price_to_ticks(P_o, SELL, cfg.tick) if P_o > 0 else 1

    def agent_turn(self, t: int) -> tuple[bool, int, str] | None:
        """Order agent ``(t - 1) mod n`` submits at step ``t``.

        Returns ``(is_buy, price_ticks, origin)`` after the regulation
        transform, or None when nothing is submitted (no bid to sell into,
        or dropped by the version-two price limit). Does not touch the book.
        """
        j = (t - 1) % self.cfg.n
        origin = self._forced_sell(t, j)
        if origin is None:
            is_buy, price = self._normal_order(t, j)
            origin = NORMAL
        else:
            best = self.book.best_bid_ticks() if self.book.n_bids else None
            if best is None:
                return None
            is_buy, price = False, best

        kind = self._kind
        if (kind == PRICE_LIMIT or kind == PRICE_LIMIT_V2) and t >= self._reg_from:
            lo, hi = band_ticks(self.reference_price(t), self.cfg.regulation.pr, self.cfg.tick)
            if (not is_buy and price < lo) or (is_buy and price > hi):
                if kind == PRICE_LIMIT_V2:
                    return None
                price = hi if is_buy else lo
        return is_buy, price, origin

    def step(self) -> None:
        """Advance the simulation by one time step."""
        t = self.t + 1
        cfg = self.cfg
        book = self.book
        counts = self.counts
        if t > cfg.t_e:
            raise RuntimeError("run already finished")

        if t < self._halted_until:
            counts["halted_turns"] += 1
            if not cfg.halt_pauses_expiry:
                self._clock += 1
        else:
            self._clock += 1
            book.cancel_expired(self._clock, cfg.t_c)
            order = self.agent_turn(t)
            if order is None:
                j = (t - 1) % cfg.n
                if self._forced_sell(t, j) is not None:
                    counts["discarded_no_bid"] += 1
                else:
                    counts["v2_dropped"] += 1
            else:
                is_buy, price, origin = order
                if origin != NORMAL:
                    counts[origin] += 1
                book.place(is_buy, price, (t - 1) % cfg.n + 1, t, stamp=self._clock)

        mid = book.mid_price()
        self.mids[t] = mid
        self.t = t

        # stop-loss triggers: each agent fires once, at the first mid below its threshold
        order, thresh, ptr = self._sl_order, self._sl_thresh, self._sl_ptr
        while ptr < cfg.n and mid < thresh[order[ptr]]:
            self._sl_start[order[ptr]] = t
            ptr += 1
        self._sl_ptr = ptr

        if self._kind == CIRCUIT_BREAKER and t >= self._halted_until and t >= self._reg_from:
            ref = self.reference_price(t)
            pr = cfg.regulation.pr
            if mid < ref - pr or mid > ref + pr:
                self._halted_until = t + cfg.regulation.halt_length
                self.halt_starts.append(t)

        if t in self._snapshot_times:
            self.snapshots[t] = book.snapshot_bins(cfg.snapshot_bin)

    def run(self) -> RunResult:
        step = self.step
        for _ in range(self.t, self.cfg.t_e):
            step()
        return self.result()

    def result(self) -> RunResult:
        cfg = self.cfg
        mids = np.asarray(self.mids[1:self.t + 1], dtype=float)
        book = self.book
        i_min = int(np.argmin(mids))
        if cfg.record_trades:
            trades = (
                np.asarray(book.trade_time, dtype=np.int64),
                np.asarray(book.trade_price, dtype=np.int64) * cfg.tick,
                np.asarray(book.trade_buyer, dtype=np.int64),
                np.asarray(book.trade_seller, dtype=np.int64),
            )
        else:
            trades = (np.empty(0, np.int64), np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64))
        counts = dict(self.counts)
        counts.update(
            submitted=book.n_submitted, executed=book.n_executed,
            cancelled=book.n_cancelled, resting=len(book),
            halts=len(self.halt_starts),
            stop_loss_triggered=self._sl_ptr,
        )
        return RunResult(
            config=cfg,
            mids=mids,
            falling_depth=float(cfg.P_f - mids[i_min]),
            min_mid_time=i_min + 1,
            trade_time=trades[0],
            trade_price=trades[1],
            trade_buyer=trades[2],
            trade_seller=trades[3],
            snapshots=dict(self.snapshots),
            halt_starts=list(self.halt_starts),
            counts=counts,
        )


def run_simulation(cfg: SimConfig) -> RunResult:
    """Run ``cfg`` from t = 1 to t_e and collect the result."""
    return Simulation(cfg).run()


def agent_turn(sim: Simulation, t: int) -> Order | None:
    """The order agent ``(t - 1) mod n`` would submit at ``t`` in ``sim``."""
    out = sim.agent_turn(t)
    if out is None:
        return None
    is_buy, price, _ = out
    return Order(t, (t - 1) % sim.cfg.n + 1, BUY if is_buy else SELL,
                 price * sim.cfg.tick, t)


# -- traces ----------------------------------------------------------------

def write_trace(result: RunResult, path: str | Path) -> None:
    """Write ``t,mid`` lines under a ``#`` metadata header."""
    cfg = result.config
    lines = [
        f"# seed={cfg.seed}",
        f"# config_hash={config_hash(cfg)}",
        f"# falling_depth={result.falling_depth!r}",
    ]
    lines += [f"# {k}={v}" for k, v in to_flat(cfg).items()]
    lines.append("t,mid")
    lines += [f"{t},{m!r}" for t, m in enumerate(result.mids.tolist(), 1)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path: str | Path) -> tuple[dict[str, str], np.ndarray]:
    """Return ``(metadata, mids)`` from a trace written by :func:`write_trace`."""
    meta: dict[str, str] = {}
    mids = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta.setdefault(k, v)
        elif line and line != "t,mid":
            t, m = line.split(",")
            mids.append(float(m))
    return meta, np.asarray(mids)
