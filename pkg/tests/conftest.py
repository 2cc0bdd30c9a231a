from dataclasses import replace

import pytest

from marketreg.agents import AgentMaxima
from marketreg.config import SimConfig
from marketreg.shocks import ErroneousConfig


def small_config(**kw) -> SimConfig:
    """A scaled-down market that still crashes and recovers in 9000 steps."""
    cfg = SimConfig(
        n=100, t_c=1000, t_e=9000,
        maxima=AgentMaxima(tau_max=1000, pl_min=100.0, pl_max=300.0, tl_min=1000, tl_max=5000),
        erroneous=ErroneousConfig(t_ms=3000, t_me=6000, p_m=0.15),
    )
    return replace(cfg, **kw)


@pytest.fixture
def small():
    return small_config()


# acceptance verdicts, printed once at the end of the session
VERDICTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(VERDICTS):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
