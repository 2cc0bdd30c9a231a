"""Parameter sweeps, aggregate tables and the stylized-facts check."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import SimConfig
from .engine import RunResult, run_simulation
from .regulation import (
    ALIASES,
    CIRCUIT_BREAKER,
    NONE,
    PRICE_LIMIT,
    PRICE_LIMIT_V2,
    SHORT_NAMES,
)
from .stats import autocorr_squared_returns, excess_kurtosis, log_returns, run_falling_speed

log = logging.getLogger(__name__)

FULL_TRS = (1000, 2000, 5000, 10000, 20000)
FULL_PRS = (10, 20, 50, 100, 200, 500, 1000)
FULL_KINDS = (PRICE_LIMIT, CIRCUIT_BREAKER, PRICE_LIMIT_V2)
FALLBACK_FALLING_SPEED = 0.052
DEFAULT_SEEDS = 20


class SweepError(RuntimeError):
    """A single run inside a sweep failed."""

    def __init__(self, kind: str, tr: int, pr: float, seed: int, cause: BaseException):
        super().__init__(f"run failed for regulation={kind} tr={tr} pr={pr:g} seed={seed}: {cause!r}")
        self.kind, self.tr, self.pr, self.seed = kind, tr, pr, seed


@dataclass(frozen=True)
class SweepSpec:
    trs: tuple[int, ...] = FULL_TRS
    prs: tuple[float, ...] = FULL_PRS
    kinds: tuple[str, ...] = FULL_KINDS
    seeds: int = DEFAULT_SEEDS
    base: SimConfig = field(default_factory=SimConfig)
    out_dir: Path | None = None
    workers: int = 1
    first_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(ALIASES.get(k, k) for k in self.kinds))
        if not (self.trs and self.prs and self.kinds):
            raise ValueError("tr, pr and regulation lists must be non-empty")
        if self.seeds < 1:
            raise ValueError("need at least one seed")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def seed_list(self) -> list[int]:
        return list(range(self.first_seed, self.first_seed + self.seeds))

    def cells(self) -> list[tuple[str, int, float]]:
        return [(k, tr, pr) for k in self.kinds if k != NONE for tr in self.trs for pr in self.prs]


@dataclass(frozen=True)
class AggregateCell:
    regulation: str
    tr: int
    pr: float
    mean: float
    std: float
    runs: int
    gray: bool

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.runs) if self.runs > 1 else 0.0


@dataclass
class SweepResult:
    spec: SweepSpec
    depths: dict[tuple[str, int, float], np.ndarray]
    baseline_depths: np.ndarray
    baseline_speeds: np.ndarray
    baseline_min_times: np.ndarray
    s_fall: float
    cells: dict[tuple[str, int, float], AggregateCell]

    def table(self, kind: str) -> np.ndarray:
        """Mean depths as a (len(prs), len(trs)) array."""
        kind = ALIASES.get(kind, kind)
        sp = self.spec
        return np.array([[self.cells[kind, tr, pr].mean for tr in sp.trs] for pr in sp.prs])

    def paired_difference(self, a: str, b: str, tr: int, pr: float) -> np.ndarray:
        """Per-seed depth difference ``a - b`` (same random number tables)."""
        return self.depths[ALIASES.get(a, a), tr, pr] - self.depths[ALIASES.get(b, b), tr, pr]


def is_gray(pr: float, tr: int, s_fall: float) -> bool:
    """True when the band cannot keep up with the fall (``Pr/tr >= S_fall``)."""
    return not pr / tr < s_fall


def _summarize(cfg: SimConfig) -> tuple[float, int, float]:
    res = run_simulation(replace(cfg, record_trades=False))
    return res.falling_depth, res.min_mid_time, run_falling_speed(res)


def _run_many(cfgs: list[SimConfig], workers: int) -> list[tuple[float, int, float] | BaseException]:
    def guarded(fn, cfg):
        try:
            return fn(cfg)
        except Exception as exc:  # reported with its cell below
            return exc

    if workers == 1 or len(cfgs) == 1:
        return [guarded(_summarize, c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_summarize, c) for c in cfgs]
        out = []
        for f in futures:
            try:
                out.append(f.result())
            except Exception as exc:
                out.append(exc)
        return out


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run every (regulation, tr, Pr, seed) combination plus one unregulated
    run per seed, and aggregate falling depths per cell.

    Seeds are shared across cells, so cells differ only in their regulation
    parameters. Results do not depend on ``spec.workers``.
    """
    seeds = spec.seed_list
    jobs: list[tuple[str, int, float, int]] = [(NONE, 0, 0.0, s) for s in seeds]
    jobs += [(k, tr, pr, s) for (k, tr, pr) in spec.cells() for s in seeds]
    cfgs = []
    for kind, tr, pr, seed in jobs:
        cfg = spec.base.with_seed(seed)
        if kind != NONE:
            r = spec.base.regulation
            cfg = cfg.with_regulation(kind, tr, pr, r.tr2)
        else:
            cfg = cfg.with_regulation(NONE)
        cfgs.append(cfg)
    log.info("sweep: %d runs on %d worker(s)", len(cfgs), spec.workers)
    outputs = _run_many(cfgs, spec.workers)
    for job, out in zip(jobs, outputs):
        if isinstance(out, BaseException):
            raise SweepError(*job, out) from out

    n = len(seeds)
    base = outputs[:n]
    baseline_depths = np.array([o[0] for o in base])
    baseline_min_times = np.array([o[1] for o in base])
    baseline_speeds = np.array([o[2] for o in base])
    s_fall = float(baseline_speeds.mean()) if np.all(np.isfinite(baseline_speeds)) else FALLBACK_FALLING_SPEED
    if not s_fall > 0:
        s_fall = FALLBACK_FALLING_SPEED

    depths: dict[tuple[str, int, float], np.ndarray] = {}
    cells: dict[tuple[str, int, float], AggregateCell] = {}
    for i, key in enumerate(spec.cells()):
        d = np.array([o[0] for o in outputs[n * (i + 1): n * (i + 2)]])
        depths[key] = d
        kind, tr, pr = key
        cells[key] = AggregateCell(
            kind, tr, pr, float(d.mean()), float(d.std(ddof=1)) if n > 1 else 0.0, n,
            is_gray(pr, tr, s_fall),
        )
    result = SweepResult(spec, depths, baseline_depths, baseline_speeds, baseline_min_times, s_fall, cells)
    if spec.out_dir is not None:
        emit_tables(result, spec.out_dir, "csv")
        emit_tables(result, spec.out_dir, "markdown")
    return result


# -- tables ----------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.1f}"


def _difference_pairs(kinds) -> list[tuple[str, str]]:
    pairs = []
    for a in (PRICE_LIMIT, PRICE_LIMIT_V2):
        if a in kinds and CIRCUIT_BREAKER in kinds:
            pairs.append((a, CIRCUIT_BREAKER))
    return pairs


def _write_grid(path: Path, spec: SweepSpec, values, gray, fmt: str, title: str) -> Path:
    if fmt == "csv":
        lines = ["pr," + ",".join(f"tr_{tr}" for tr in spec.trs)]
        for i, pr in enumerate(spec.prs):
            lines.append(f"{pr:g}," + ",".join(_fmt(v) for v in values[i]))
    elif fmt == "markdown":
        lines = [f"### {title}", "",
                 "| Pr | " + " | ".join(f"tr={tr}" for tr in spec.trs) + " | shaded |",
                 "|---:|" + "---:|" * len(spec.trs) + ":---|"]
        for i, pr in enumerate(spec.prs):
            cells = [_fmt(v) + (" *" if g else "") for v, g in zip(values[i], gray[i])]
            marks = ",".join(str(tr) for tr, g in zip(spec.trs, gray[i]) if g) or "-"
            lines.append(f"| {pr:g} | " + " | ".join(cells) + f" | {marks} |")
        lines.append("")
        lines.append("`*` marks cells where Pr/tr >= falling speed.")
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write table {path}: {exc}") from exc
    return path


def emit_tables(result: SweepResult, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """One depth table per regulation plus limit-minus-breaker differences."""
    spec = result.spec
    if not result.cells:
        raise ValueError("empty grid")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    ext = "csv" if fmt == "csv" else "md"
    gray = [[is_gray(pr, tr, result.s_fall) for tr in spec.trs] for pr in spec.prs]
    paths = []
    kinds = [k for k in spec.kinds if k != NONE]
    for kind in kinds:
        paths.append(_write_grid(out / f"depth_{SHORT_NAMES[kind]}.{ext}", spec, result.table(kind), gray, fmt,
                                 f"Mean falling depth, {SHORT_NAMES[kind]}"))
    for a, b in _difference_pairs(kinds):
        diff = result.table(a) - result.table(b)
        name = f"diff_{SHORT_NAMES[a]}_minus_{SHORT_NAMES[b]}"
        paths.append(_write_grid(out / f"{name}.{ext}", spec, diff, gray, fmt,
                                 f"Mean depth difference, {SHORT_NAMES[a]} - {SHORT_NAMES[b]}"))
    if fmt == "csv":
        rows = ["regulation,tr,pr,seed,falling_depth"]
        for (kind, tr, pr), d in result.depths.items():
            rows += [f"{SHORT_NAMES[kind]},{tr},{pr:g},{s},{x!r}" for s, x in zip(spec.seed_list, d.tolist())]
        rows += [f"none,0,0,{s},{x!r}" for s, x in zip(spec.seed_list, result.baseline_depths.tolist())]
        p = out / "runs.csv"
        p.write_text("\n".join(rows) + "\n")
        paths.append(p)
        p = out / "falling_speed.csv"
        p.write_text("seed,falling_speed,min_mid_time\n" + "".join(
            f"{s},{v!r},{m}\n" for s, v, m in zip(spec.seed_list, result.baseline_speeds.tolist(),
                                                  result.baseline_min_times.tolist())))
        paths.append(p)
    return paths


# -- trajectories ----------------------------------------------------------

def trajectory_name(cfg: SimConfig) -> str:
    r = cfg.regulation
    if r.kind == NONE:
        return f"traj_none_seed{cfg.seed}.csv"
    return f"traj_{SHORT_NAMES[r.kind]}_tr{r.tr}_pr{r.pr:g}_seed{cfg.seed}.csv"


def emit_trajectories(results: list[RunResult], out_dir: str | Path, every: int = 1) -> list[Path]:
    """Write a ``t,mid`` file per run, keeping every ``every``-th step."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for res in results:
        p = out / trajectory_name(res.config)
        lines = ["t,mid"] + [f"{t},{m!r}" for t, m in enumerate(res.mids.tolist(), 1) if t % every == 0 or t == 1]
        try:
            p.write_text("\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write trajectory {p}: {exc}") from exc
        paths.append(p)
    return paths


def comparison_runs(base: SimConfig, tr: int, pr: float, kinds=(NONE, PRICE_LIMIT, CIRCUIT_BREAKER)) -> list[RunResult]:
    """Same-seed runs under several regulations, as in the trajectory figures."""
    return [run_simulation(base.with_regulation(k, tr, pr, base.regulation.tr2)) for k in kinds]


# -- stylized facts --------------------------------------------------------

@dataclass
class StylizedFactsReport:
    kurtosis: float
    acf: np.ndarray
    shuffled_acf: np.ndarray
    per_seed_kurtosis: np.ndarray
    per_seed_acf: np.ndarray
    horizon: int
    seeds: list[int]

    @property
    def checks(self) -> dict[str, bool]:
        acf = self.acf
        return {
            "kurtosis in (1, 100)": 1.0 < self.kurtosis < 100.0,
            "squared-return acf in (0, 0.2]": bool(np.all((acf > 0) & (acf <= 0.2))),
            "lag-1 acf is the largest": bool(acf[0] == acf.max()),
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_table(self) -> str:
        lines = ["statistic,lag,value", f"kurtosis,,{self.kurtosis:.3f}"]
        lines += [f"acf_squared_returns,{k},{v:.3f}" for k, v in enumerate(self.acf, 1)]
        return "\n".join(lines) + "\n"


def stylized_facts_of(mids, horizon: int = 100, lags: int = 5) -> tuple[float, np.ndarray]:
    r = log_returns(mids, horizon)
    return excess_kurtosis(r), autocorr_squared_returns(r, range(1, lags + 1))


def validate_stylized_facts(cfg: SimConfig, seeds: int = 1, horizon: int = 100, lags: int = 5,
                            warmup: int | None = None) -> StylizedFactsReport:
    """Fat tails and volatility clustering of the unshocked, unregulated market.

    Statistics use non-overlapping ``horizon``-step log returns after the
    bootstrap period (``t_c`` steps unless ``warmup`` is given) and are
    averaged over ``seeds`` consecutive seeds starting at ``cfg.seed``. A
    shuffled copy of each return series gives the no-clustering control.
    """
    if cfg.erroneous.p_m != 0 or cfg.regulation.kind != NONE:
        raise ValueError("stylized facts are measured without erroneous orders or regulation")
    warmup = cfg.t_c if warmup is None else warmup
    kurt, acfs, shuffled = [], [], []
    seed_list = list(range(cfg.seed, cfg.seed + seeds))
    for seed in seed_list:
        res = run_simulation(replace(cfg, seed=seed, record_trades=False))
        r = log_returns(res.mids[warmup:], horizon)
        kurt.append(excess_kurtosis(r))
        acfs.append(autocorr_squared_returns(r, range(1, lags + 1)))
        perm = np.random.default_rng(seed).permutation(r)
        shuffled.append(autocorr_squared_returns(perm, range(1, lags + 1)))
    acfs_a = np.array(acfs)
    return StylizedFactsReport(
        kurtosis=float(np.mean(kurt)),
        acf=acfs_a.mean(axis=0),
        shuffled_acf=np.array(shuffled).mean(axis=0),
        per_seed_kurtosis=np.array(kurt),
        per_seed_acf=acfs_a,
        horizon=horizon,
        seeds=seed_list,
    )


def order_book_snapshots(base: SimConfig, tr: int, pr: float, at: int,
                         kinds=(PRICE_LIMIT, CIRCUIT_BREAKER, PRICE_LIMIT_V2)) -> dict[str, list]:
    """Binned order books at step ``at`` for each regulation, same seed."""
    out = {}
    for k in kinds:
        cfg = replace(base.with_regulation(k, tr, pr, base.regulation.tr2), snapshot_times=(at,), record_trades=False)
        out[k] = run_simulation(cfg).snapshots[at]
    return out
