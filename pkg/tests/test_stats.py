"""Statistics checked against plain-loop oracles and closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketreg.stats import (
    autocorr,
    autocorr_squared_returns,
    condition_predicates,
    estimate_falling_speed,
    excess_kurtosis,
    falling_depth,
    log_returns,
    volatility,
)


# -- oracles: written from the textbook definitions, loop by loop ----------

def oracle_mean(xs):
    return math.fsum(xs) / len(xs)


def oracle_kurtosis(xs):
    m = oracle_mean(xs)
    m2 = math.fsum((x - m) ** 2 for x in xs) / len(xs)
    m4 = math.fsum((x - m) ** 4 for x in xs) / len(xs)
    return m4 / (m2 * m2) - 3.0


def oracle_acf(xs, k):
    m = oracle_mean(xs)
    num = math.fsum((xs[i] - m) * (xs[i + k] - m) for i in range(len(xs) - k))
    den = math.fsum((x - m) ** 2 for x in xs)
    return num / den


def oracle_returns(prices, h):
    return [math.log(prices[i] / prices[i - h]) for i in range(h, len(prices), h)]


def oracle_volatility(prices, h):
    r = oracle_returns(prices, h)
    m = oracle_mean(r)
    return math.sqrt(math.fsum((x - m) ** 2 for x in r) / len(r))


def oracle_depth(prices, p_f):
    low = prices[0]
    for p in prices:
        if p < low:
            low = p
    return p_f - low


def _series(rng):
    n = int(rng.integers(20, 400))
    steps = rng.standard_t(3, n) * 0.002
    return (10000.0 * np.exp(np.cumsum(steps))).tolist()


def test_oracle_equivalence_on_random_series():
    rng = np.random.default_rng(20240601)
    for _ in range(1000):
        prices = _series(rng)
        h = int(rng.integers(1, 5))
        r = oracle_returns(prices, h)
        got_r = log_returns(prices, h)
        assert np.allclose(got_r, r, rtol=1e-9, atol=0)
        assert excess_kurtosis(r) == pytest.approx(oracle_kurtosis(r), rel=1e-9)
        sq = [x * x for x in r]
        for k, v in enumerate(autocorr_squared_returns(r, range(1, 4)), 1):
            assert v == pytest.approx(oracle_acf(sq, k), rel=1e-9, abs=1e-12)
        assert volatility(prices, h) == pytest.approx(oracle_volatility(prices, h), rel=1e-9)
        assert falling_depth(prices, 10000.0) == pytest.approx(oracle_depth(prices, 10000.0), rel=1e-9, abs=1e-9)


def test_volatility_closed_form():
    prices = [100.0, 110.0, 100.0, 110.0, 100.0, 110.0]
    # returns alternate +-ln(1.1): five of them, mean ln(1.1)/5
    expected = math.log(1.1) * math.sqrt(24) / 5
    assert volatility(prices, 1) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.0933845231254056629, rel=1e-15)


def test_kurtosis_of_symmetric_two_point_sample():
    assert excess_kurtosis([1.0, -1.0] * 10) == pytest.approx(-2.0)


def test_acf_of_alternating_squares():
    x = [0.0, 2.0] * 4
    # squared series 0,4,0,4,...: lag-1 sum of products 7*(-4) over 8*4
    assert autocorr_squared_returns(x, [1])[0] == pytest.approx(-0.875)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=10, max_size=60), st.floats(0.1, 10), st.floats(-5, 5))
def test_moments_affine_invariant(xs, a, b):
    x = np.array(xs)
    if x.std() < 1e-3:
        return
    y = a * x + b
    assert excess_kurtosis(y) == pytest.approx(excess_kurtosis(x), rel=1e-6, abs=1e-9)
    assert np.allclose(autocorr(y, [1, 2]), autocorr(x, [1, 2]), rtol=1e-6, atol=1e-9)


def test_falling_speed_on_a_line():
    t = np.arange(1, 1001)
    mids = 10000.0 - 0.05 * t
    assert estimate_falling_speed(mids, (100, 800)) == pytest.approx(0.05)
    assert estimate_falling_speed(mids + np.sin(t), (1, 1000)) == pytest.approx(0.05, rel=0.05)


@pytest.mark.parametrize("window", [(10, 10), (0, 50), (900, 1200)])
def test_falling_speed_rejects_bad_windows(window):
    with pytest.raises(ValueError):
        estimate_falling_speed(np.ones(1000), window)


def test_condition_predicates():
    c = condition_predicates(pr=100, tr=10000, s_fall=0.052, vol_tr=50, t_m=42000, p_dd=2054)
    assert c == (True, True, True, True) and c.all
    c = condition_predicates(pr=100, tr=1000, s_fall=0.052, vol_tr=50, t_m=42000, p_dd=2054)
    assert not c.speed and not c.all
    assert not condition_predicates(10, 10000, 0.052, 50, 42000, 2054).volatility
    assert not condition_predicates(100, 50000, 0.052, 50, 42000, 2054).period
    assert not condition_predicates(3000, 100000, 0.052, 50, 200000, 2054).depth
    with pytest.raises(ValueError):
        condition_predicates(0, 1, 1, 1, 1, 1)


def test_input_validation():
    with pytest.raises(ValueError):
        falling_depth([], 1.0)
    with pytest.raises(ValueError):
        log_returns([1.0, 2.0], 2)
    with pytest.raises(ValueError):
        log_returns([1.0, -2.0, 3.0], 1)
    with pytest.raises(ValueError):
        excess_kurtosis([1.0, 1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        autocorr([1.0, 2.0, 3.0], [3])


def test_overlapping_returns():
    p = [1.0, 2.0, 4.0, 8.0]
    assert np.allclose(log_returns(p, 2, overlapping=True), [math.log(4)] * 2)
    assert np.allclose(log_returns(p, 2), [math.log(4)])
