"""Look inside the order book when a price limit has a short lookback.

With tr=2000 and Pr=20 the lower limit price follows the falling mid,
and every erroneous sell is rewritten to the lower limit. Those orders
stack up just above the best ask and act as a wall.
"""

from marketreg import SimConfig
from marketreg.harness import order_book_snapshots

base = SimConfig(seed=0)
at = 60000  # end of the erroneous-order period
books = order_book_snapshots(base, tr=2000, pr=20, at=at, kinds=("price_limit", "circuit_breaker"))

for kind, rows in books.items():
    print(f"# {kind}, t={at}")
    print(f"{'bin':>17s} {'sell':>6s} {'buy':>6s}")
    # rows are descending; show the ten bins around the spread
    spread = next((i for i, r in enumerate(rows) if r[3] > 0), len(rows))
    for low, high, sells, buys in rows[max(spread - 5, 0): spread + 5]:
        print(f"{low:8.0f}-{high:<8.0f} {sells:6d} {buys:6d}")
    print()
