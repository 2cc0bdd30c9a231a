"""A reduced (tr, Pr) grid with a handful of seeds.

The full grid is ``marketreg sweep --out results``; this keeps it to a
few minutes and prints the tables instead of writing them.
"""

import numpy as np

from marketreg import SimConfig
from marketreg.harness import SweepSpec, is_gray, run_sweep

spec = SweepSpec(trs=(1000, 5000, 20000), prs=(20, 100, 500),
                 kinds=("limit", "breaker"), seeds=3, base=SimConfig(record_trades=False))
result = run_sweep(spec)
print(f"falling speed from the unregulated runs: {result.s_fall:.4f}")
print(f"unregulated depth: {result.baseline_depths.mean():.0f}\n")

for kind in ("limit", "breaker"):
    table = result.table(kind)
    print(f"{kind}: mean falling depth (* = Pr/tr >= falling speed)")
    print("Pr \\ tr " + "".join(f"{tr:>10d}" for tr in spec.trs))
    for i, pr in enumerate(spec.prs):
        cells = "".join(f"{table[i, j]:9.0f}{'*' if is_gray(pr, tr, result.s_fall) else ' '}"
                        for j, tr in enumerate(spec.trs))
        print(f"{pr:7g} {cells}")
    print()

diff = result.table("limit") - result.table("breaker")
print("limit minus breaker:\n", np.round(diff))
