"""Command-line entry point: ``marketreg simulate|sweep|validate|snapshot``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .engine import run_simulation, write_trace
from .harness import (
    DEFAULT_SEEDS,
    FULL_KINDS,
    FULL_PRS,
    FULL_TRS,
    SweepSpec,
    order_book_snapshots,
    run_sweep,
    validate_stylized_facts,
)
from .orderbook import write_snapshot_csv
from .regulation import ALIASES, NONE, SHORT_NAMES


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _overrides(args) -> dict[str, str]:
    out = {}
    for key in ("regulation", "tr", "pr", "tr2", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = str(v)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")


def _add_regulation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--regulation", choices=sorted(set(ALIASES)))
    p.add_argument("--tr", type=int)
    p.add_argument("--pr", type=float)
    p.add_argument("--tr2", type=int)
    p.add_argument("--seed", type=int)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    res = run_simulation(cfg)
    print(f"seed={cfg.seed} regulation={SHORT_NAMES[cfg.regulation.kind]} "
          f"falling_depth={res.falling_depth:.2f} min_mid_time={res.min_mid_time} "
          f"halts={res.counts['halts']}")
    if args.trace:
        write_trace(res, args.trace)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    if args.grid == "full":
        trs, prs, kinds = FULL_TRS, FULL_PRS, FULL_KINDS
    else:
        trs = _ints(args.trs) if args.trs else (cfg.regulation.tr,)
        prs = _floats(args.prs) if args.prs else (cfg.regulation.pr,)
        kinds = tuple(args.kinds.split(",")) if args.kinds else (cfg.regulation.kind,)
        kinds = tuple(ALIASES[k] for k in kinds if ALIASES[k] != NONE)
        if not kinds:
            raise ValueError("custom grid needs at least one regulation besides none")
    spec = SweepSpec(trs=trs, prs=prs, kinds=kinds, seeds=args.seeds, base=cfg,
                     out_dir=args.out, workers=args.workers, first_seed=cfg.seed)
    result = run_sweep(spec)
    print(f"falling speed estimate {result.s_fall:.4f}; tables written to {args.out}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    cfg = replace(cfg, erroneous=replace(cfg.erroneous, p_m=0.0)).with_regulation(NONE)
    report = validate_stylized_facts(cfg, seeds=args.seeds)
    sys.stdout.write(report.to_table())
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if report.passed else 1


def cmd_snapshot(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    r = cfg.regulation
    kinds = (r.kind,) if r.kind != NONE else ("price_limit", "circuit_breaker", "price_limit_v2")
    books = order_book_snapshots(cfg, r.tr, r.pr, args.at, kinds)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for kind, rows in books.items():
        if out:
            write_snapshot_csv(rows, out / f"book_{SHORT_NAMES[kind]}_t{args.at}.csv")
        else:
            print(f"# {SHORT_NAMES[kind]}")
            print("bin_low,bin_high,sell_shares,buy_shares")
            for low, high, s, b in rows:
                print(f"{low:g},{high:g},{s},{b}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marketreg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation")
    _add_common(p)
    _add_regulation(p)
    p.add_argument("--trace", type=Path, help="write a t,mid trace here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="multi-seed parameter grid")
    _add_common(p)
    p.add_argument("--seeds", type=int, default=DEFAULT_SEEDS)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--grid", choices=("full", "custom"), default="full")
    p.add_argument("--trs", help="comma-separated tr values (custom grid)")
    p.add_argument("--prs", help="comma-separated Pr values (custom grid)")
    p.add_argument("--kinds", help="comma-separated regulations (custom grid)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="stylized facts of the unshocked market")
    _add_common(p)
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("snapshot", help="binned order book at one time step")
    _add_common(p)
    _add_regulation(p)
    p.add_argument("--at", type=int, required=True)
    p.add_argument("--out", type=Path, help="directory for CSV files (default: stdout)")
    p.set_defaults(func=cmd_snapshot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"marketreg {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
