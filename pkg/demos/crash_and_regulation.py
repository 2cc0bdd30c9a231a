"""Walk through one flash crash and what each regulation does to it.

Run from the repository root:  python demos/crash_and_regulation.py
"""

import numpy as np

from marketreg import SimConfig
from marketreg.engine import run_simulation

# The default config is the reference market: 1000 agents, erroneous
# sell orders between t=30000 and t=60000, stop-loss selling enabled.
base = SimConfig(seed=1, record_trades=False)

free = run_simulation(base)
print(f"no regulation: lowest mid {free.mids.min():.1f} at t={free.min_mid_time}, "
      f"falling depth {free.falling_depth:.1f}")
print(f"  stop-loss agents triggered: {free.counts['stop_loss_triggered']} of {base.n}")

# Sample the mid every 10000 steps to see the fall and the recovery
for t in range(10000, base.t_e + 1, 10000):
    print(f"  t={t:6d}  mid={free.mid_at(t):9.2f}")

# Same seed, same random tables: only the regulation differs
print()
for kind, tr, pr in [("limit", 10000, 100), ("breaker", 10000, 100),
                     ("limit", 2000, 100), ("breaker", 2000, 100), ("limit_v2", 2000, 100)]:
    res = run_simulation(base.with_regulation(kind, tr, pr))
    extra = f", halts {res.counts['halts']}" if kind == "breaker" else ""
    print(f"{kind:9s} tr={tr:5d} Pr={pr}: depth {res.falling_depth:7.1f}{extra}")

# A short lookback lets the price limit ratchet the band down step by step
# while the breaker stops trading outright.
lim = run_simulation(base.with_regulation("limit", 2000, 100))
brk = run_simulation(base.with_regulation("breaker", 2000, 100))
gap = lim.mids - brk.mids
print(f"\nlargest limit-minus-breaker mid gap: {gap.min():.1f} at t={int(np.argmin(gap)) + 1}")
