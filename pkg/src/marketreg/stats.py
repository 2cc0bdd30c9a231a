"""Measurements on mid-price trajectories."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


def falling_depth(mids, P_f: float) -> float:
    """``P_f`` minus the lowest mid of the run."""
    mids = np.asarray(mids, dtype=float)
    if mids.size == 0:
        raise ValueError("empty price series")
    return float(P_f - mids.min())


def estimate_falling_speed(mids, window: tuple[int, int], start: int = 1) -> float:
    """Magnitude of the least-squares slope of mid vs. time over ``window``.

    ``mids[i]`` is taken to be the mid at time ``start + i`` and the window
    ``[t_a, t_b]`` is inclusive.
    """
    t_a, t_b = window
    mids = np.asarray(mids, dtype=float)
    if t_b <= t_a:
        raise ValueError(f"degenerate window [{t_a}, {t_b}]")
    lo, hi = t_a - start, t_b - start + 1
    if lo < 0 or hi > mids.size:
        raise ValueError(f"window [{t_a}, {t_b}] outside the series")
    t = np.arange(t_a, t_b + 1, dtype=float)
    y = mids[lo:hi]
    tc = t - t.mean()
    slope = float(tc @ (y - y.mean()) / (tc @ tc))
    return abs(slope)


def run_falling_speed(result) -> float:
    """Falling speed of one run, measured from the start of the erroneous
    orders to the time of the lowest mid."""
    t_a = result.config.erroneous.t_ms
    t_b = max(result.min_mid_time, t_a + 1)
    return estimate_falling_speed(result.mids, (t_a, t_b))


class Conditions(NamedTuple):
    speed: bool      # Pr / tr < S_fall
    volatility: bool  # Pr > Vol_tr
    period: bool      # tr < t_m
    depth: bool       # Pr < P_DD

    @property
    def all(self) -> bool:
        return self.speed and self.volatility and self.period and self.depth


def condition_predicates(pr: float, tr: float, s_fall: float, vol_tr: float,
                         t_m: float, p_dd: float) -> Conditions:
    """The four conditions under which a (tr, Pr) regulation can stop a fall."""
    if min(pr, tr, s_fall, t_m, p_dd) <= 0 or vol_tr < 0:
        raise ValueError("inputs must be positive")
    return Conditions(pr / tr < s_fall, pr > vol_tr, tr < t_m, pr < p_dd)


def log_returns(mids, horizon: int, overlapping: bool = False) -> np.ndarray:
    """``ln(P[t] / P[t - horizon])`` sampled every ``horizon`` steps, or at
    every step when ``overlapping``."""
    mids = np.asarray(mids, dtype=float)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if mids.size <= horizon:
        raise ValueError("series shorter than the return horizon")
    if np.any(mids <= 0):
        raise ValueError("prices must be positive")
    if not overlapping:
        mids = mids[::horizon]
        horizon = 1
    # log of the ratio keeps full relative precision for tiny returns
    return np.log(mids[horizon:] / mids[:-horizon])


def volatility(mids, tr: int) -> float:
    """Population standard deviation of non-overlapping ``tr``-step log returns."""
    r = log_returns(mids, tr)
    if r.size < 2:
        raise ValueError("need at least two returns")
    return float(r.std())


def excess_kurtosis(returns) -> float:
    """Fourth standardized moment minus 3 (zero for a normal sample)."""
    r = np.asarray(returns, dtype=float)
    if r.size < 4:
        raise ValueError("need at least four returns")
    d = r - r.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        raise ValueError("zero variance: kurtosis undefined")
    return float(np.mean(d ** 4) / m2 ** 2 - 3.0)


def autocorr(x, lags) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    denom = d @ d
    if denom == 0:
        raise ValueError("zero variance: autocorrelation undefined")
    out = []
    for k in lags:
        if not 0 < k < x.size:
            raise ValueError(f"lag {k} out of range for length {x.size}")
        out.append(d[:-k] @ d[k:] / denom)
    return np.asarray(out)


def autocorr_squared_returns(returns, lags=range(1, 6)) -> np.ndarray:
    """Sample autocorrelation of squared returns at each lag."""
    r = np.asarray(returns, dtype=float)
    return autocorr(r * r, list(lags))
