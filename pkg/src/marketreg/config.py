"""Simulation configuration and its flat ``key = value`` file format.

Every model constant has a key whose default is the published experiment
value, so an empty file reproduces the reference setup.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .agents import AgentMaxima
from .regulation import SHORT_NAMES, RegulationConfig
from .shocks import ErroneousConfig, StopLossConfig


@dataclass(frozen=True)
class SimConfig:
    tick: float = 0.01
    P_f: float = 10000.0
    t_e: int = 150000
    n: int = 1000
    maxima: AgentMaxima = field(default_factory=AgentMaxima)
    sigma_eps: float = 0.03
    sigma_is_variance: bool = False
    P_d: float = 1000.0
    t_c: int = 10000
    halt_pauses_expiry: bool = True
    regulation_start: int | None = None  # defaults to t_c
    erroneous: ErroneousConfig = field(default_factory=ErroneousConfig)
    stop_loss: StopLossConfig = field(default_factory=StopLossConfig)
    regulation: RegulationConfig = field(default_factory=RegulationConfig)
    seed: int = 0
    snapshot_times: tuple[int, ...] = ()
    snapshot_bin: float = 20.0
    record_trades: bool = True

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for name in ("tick", "P_f", "P_d", "snapshot_bin"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.t_c < 1:
            raise ValueError("t_c must be >= 1")
        if self.sigma_eps < 0:
            raise ValueError("sigma_eps must be non-negative")
        self.maxima.validate()
        self.erroneous.validate()
        self.stop_loss.validate()
        if not self.t_e > self.erroneous.t_me > self.erroneous.t_ms > 0:
            raise ValueError("need t_e > t_me > t_ms > 0")
        if self.regulation_start is not None and self.regulation_start < 0:
            raise ValueError("regulation_start must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def regulation_from(self) -> int:
        """First step at which the active regulation applies."""
        return self.t_c if self.regulation_start is None else self.regulation_start

    def with_regulation(self, kind: str, tr: int | None = None, pr: float | None = None,
                        tr2: int | None = None) -> "SimConfig":
        r = self.regulation
        return replace(self, regulation=RegulationConfig(
            kind, r.tr if tr is None else tr, r.pr if pr is None else pr, tr2))

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)


# flat key -> (section attribute or None, field name, parser)
def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _num(s: str) -> float:
    v = s.strip().lower()
    if v in ("inf", "infinity"):
        return math.inf
    return float(v)


def _int(s: str) -> int:
    f = float(s)
    if f != int(f):
        raise ValueError(f"not an integer: {s!r}")
    return int(f)


def _opt_int(s: str) -> int | None:
    return None if s.strip().lower() in ("", "none", "tr", "t_c") else _int(s)


def _times(s: str) -> tuple[int, ...]:
    return tuple(_int(x) for x in s.replace(";", ",").split(",") if x.strip())


KEYS: dict[str, tuple[str | None, str, object]] = {
    "tick": (None, "tick", _num),
    "p_f": (None, "P_f", _num),
    "t_e": (None, "t_e", _int),
    "n": (None, "n", _int),
    "w1_max": ("maxima", "w1_max", _num),
    "w2_max": ("maxima", "w2_max", _num),
    "w3_max": ("maxima", "w3_max", _num),
    "tau_max": ("maxima", "tau_max", _int),
    "pl_min": ("maxima", "pl_min", _num),
    "pl_max": ("maxima", "pl_max", _num),
    "tl_min": ("maxima", "tl_min", _int),
    "tl_max": ("maxima", "tl_max", _int),
    "sigma_eps": (None, "sigma_eps", _num),
    "sigma_is_variance": (None, "sigma_is_variance", _bool),
    "p_d": (None, "P_d", _num),
    "t_c": (None, "t_c", _int),
    "halt_pauses_expiry": (None, "halt_pauses_expiry", _bool),
    "regulation_start": (None, "regulation_start", _opt_int),
    "t_ms": ("erroneous", "t_ms", _int),
    "t_me": ("erroneous", "t_me", _int),
    "p_m": ("erroneous", "p_m", _num),
    "p_l": ("stop_loss", "p_l", _num),
    "regulation": ("regulation", "kind", str.strip),
    "tr": ("regulation", "tr", _int),
    "pr": ("regulation", "pr", _num),
    "tr2": ("regulation", "tr2", _opt_int),
    "seed": (None, "seed", _int),
    "snapshot_times": (None, "snapshot_times", _times),
    "snapshot_bin": (None, "snapshot_bin", _num),
    "record_trades": (None, "record_trades", _bool),
}


def apply_overrides(cfg: SimConfig, values: dict[str, str]) -> SimConfig:
    """Return ``cfg`` with flat string ``values`` parsed and applied."""
    top: dict[str, object] = {}
    sections: dict[str, dict[str, object]] = {}
    for key, raw in values.items():
        k = key.strip().lower()
        if k not in KEYS:
            raise KeyError(f"unknown config key {key!r}")
        section, name, parse = KEYS[k]
        try:
            value = parse(raw)
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r}: {exc}") from None
        if section is None:
            top[name] = value
        else:
            sections.setdefault(section, {})[name] = value
    for section, changes in sections.items():
        top[section] = replace(getattr(cfg, section), **changes)
    return replace(cfg, **top)


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> SimConfig:
    cfg = SimConfig()
    if path is not None:
        cfg = apply_overrides(cfg, parse_config_text(Path(path).read_text()))
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    cfg.validate()
    return cfg


def to_flat(cfg: SimConfig) -> dict[str, str]:
    """Inverse of :func:`apply_overrides`, with canonical string values."""
    out = {}
    for key, (section, name, _) in KEYS.items():
        obj = cfg if section is None else getattr(cfg, section)
        value = getattr(obj, name)
        if key == "regulation":
            value = SHORT_NAMES[value]
        elif key == "tr2" and value is None:
            value = "tr"
        elif key == "regulation_start" and value is None:
            value = "t_c"
        elif key == "snapshot_times":
            value = ",".join(str(x) for x in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        out[key] = str(value) if not isinstance(value, float) else repr(value)
    return out


def dump_config(cfg: SimConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_flat(cfg).items())


def config_hash(cfg: SimConfig) -> str:
    """Short digest of every parameter except the seed."""
    flat = to_flat(cfg)
    flat.pop("seed")
    text = "\n".join(f"{k}={v}" for k, v in sorted(flat.items()))
    return hashlib.sha256(text.encode()).hexdigest()[:16]

