import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marketreg.agents import AgentParams, AgentState
from marketreg.shocks import (
    ErroneousConfig,
    StopLossConfig,
    maybe_convert_erroneous,
    stop_loss_probability,
    stop_loss_threshold,
    update_stop_loss_trigger,
)


def _agent(P_l=2000.0, t_l=40000, fair_noise=0.0):
    return AgentParams(0.5, 5.0, 0.5, 100, fair_noise, P_l, t_l)


def test_erroneous_rate_inside_window():
    cfg = ErroneousConfig()
    u = np.random.default_rng(0).random(200000)
    rate = np.mean([maybe_convert_erroneous(cfg, 45000, x) for x in u])
    assert abs(rate - 0.15) < 0.004  # ~5 sigma


@pytest.mark.parametrize("t", [0, 29999, 60001, 61000])
def test_erroneous_never_outside_window(t):
    assert not maybe_convert_erroneous(ErroneousConfig(), t, 0.0)


@pytest.mark.parametrize("t", [30000, 60000])
def test_erroneous_window_is_inclusive(t):
    assert maybe_convert_erroneous(ErroneousConfig(), t, 0.0)


def test_zero_probability_never_converts():
    cfg = ErroneousConfig(p_m=0.0)
    assert not any(maybe_convert_erroneous(cfg, 45000, u) for u in (0.0, 1e-12, 0.5))


@pytest.mark.parametrize("kwargs", [dict(t_ms=10, t_me=10), dict(t_ms=-1), dict(p_m=1.5)])
def test_erroneous_config_validation(kwargs):
    with pytest.raises(ValueError):
        ErroneousConfig(**kwargs).validate()


def test_stop_loss_config_validation():
    with pytest.raises(ValueError):
        StopLossConfig(p_l=-0.1).validate()


def test_trigger_is_strict():
    a = _agent()
    s = AgentState()
    update_stop_loss_trigger(a, s, 8000.0, 10000.0, t=100)
    assert s.stop_loss_started_at is None
    update_stop_loss_trigger(a, s, 7999.0, 10000.0, t=101)
    assert s.stop_loss_started_at == 101


def test_trigger_uses_fair_noise():
    a = _agent(fair_noise=0.01)
    assert stop_loss_threshold(a, 10000.0) == pytest.approx(10000.0 * np.exp(0.01) - 2000.0)


def test_trigger_is_one_shot():
    a = _agent(t_l=100)
    s = AgentState()
    update_stop_loss_trigger(a, s, 7000.0, 10000.0, t=10)
    update_stop_loss_trigger(a, s, 6000.0, 10000.0, t=50)
    assert s.stop_loss_started_at == 10 and not s.stop_loss_done
    update_stop_loss_trigger(a, s, 6000.0, 10000.0, t=110)
    assert s.stop_loss_done
    update_stop_loss_trigger(a, s, 5000.0, 10000.0, t=500)
    assert s.stop_loss_started_at == 10 and s.stop_loss_done


def test_trigger_rejects_non_positive_mid():
    with pytest.raises(ValueError):
        update_stop_loss_trigger(_agent(), AgentState(), 0.0, 10000.0, 1)


def test_probability_examples():
    a = _agent(t_l=40000)
    s = AgentState(stop_loss_started_at=1000)
    assert stop_loss_probability(a, s, 1000, 0.35) == pytest.approx(0.35)
    assert stop_loss_probability(a, s, 21000, 0.35) == pytest.approx(0.175)
    assert stop_loss_probability(a, s, 41000, 0.35) == 0.0
    assert stop_loss_probability(a, s, 90000, 0.35) == 0.0


def test_probability_contract():
    with pytest.raises(RuntimeError):
        stop_loss_probability(_agent(), AgentState(), 10, 0.35)
    with pytest.raises(ValueError):
        stop_loss_probability(_agent(), AgentState(stop_loss_started_at=50), 10, 0.35)


@given(st.integers(10000, 100000), st.integers(0, 50000), st.lists(st.integers(0, 200000), min_size=2, max_size=20))
def test_probability_non_increasing(t_l, start, offsets):
    a = _agent(t_l=t_l)
    s = AgentState(stop_loss_started_at=start)
    ps = [stop_loss_probability(a, s, start + d, 0.35) for d in sorted(offsets)]
    assert all(0.0 <= p <= 0.35 for p in ps)
    assert all(x >= y for x, y in zip(ps, ps[1:]))
