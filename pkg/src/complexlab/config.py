"""Experiment configuration: flat ``key = value`` text under section headers.

    [experiment]
    kind = decay
    seed = 7

    [geometry]
    n = 2

Unknown sections or keys are rejected. Lists are comma separated.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

KINDS = ("identities", "decay", "rescale", "kakeya", "bg", "acs", "bl")
CAP_BUDGET = 10_000

SECTIONS = {
    "experiment": ("kind", "seed", "workers", "output"),
    "geometry": ("n", "k", "K", "R"),
    "quadrature": ("points_per_axis", "rule", "nyquist_factor"),
    "sampling": ("samples", "trials"),
    "kakeya": ("deltas", "nu", "c", "family_size", "induction", "induction_delta", "induction_nu", "ratio_bound"),
    "decay": ("t_values", "sigma"),
    "bg": ("K_values", "amplitudes", "sweep_amplitudes", "comparability_bound", "narrow_bound"),
    "acs": ("size",),
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    kind: str = "identities"
    seed: int = 0
    workers: int = 1
    output: str = "out"
    n: int = 2
    k: int = 2
    K: int = 8
    R: float | None = None
    points_per_axis: int | None = None
    rule: str = "midpoint"
    nyquist_factor: float = 8.0
    samples: int = 1_000_000
    trials: int = 100
    deltas: list = field(default_factory=lambda: [0.25, 0.125, 0.0625, 0.03125])
    nu: float = 0.05
    c: float = 0.01
    family_size: int = 50
    induction: bool = False
    induction_delta: float = 2.0**-6
    induction_nu: float = 0.25
    ratio_bound: float = 8.0
    t_values: list = field(default_factory=lambda: [8.0, 12.0, 18.0, 27.0, 40.0, 60.0, 91.0, 128.0])
    sigma: float = 0.25
    K_values: list = field(default_factory=lambda: [8, 16, 32])
    amplitudes: int = 20
    sweep_amplitudes: int = 3
    comparability_bound: float = 2.0
    narrow_bound: float = 10.0
    size: int = 12

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


def _convert(name: str, raw: str):
    default = getattr(ExperimentConfig(), name)
    raw = raw.strip()
    try:
        if name in ("R", "points_per_axis"):
            if raw.lower() in ("", "none", "auto"):
                return None
            return float(raw) if name == "R" else int(raw)
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, list):
            item = int if name == "K_values" else float
            return [item(x) for x in raw.split(",") if x.strip()]
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from exc


def parse(text: str) -> ExperimentConfig:
    return ExperimentConfig(**_parse_values(text))


def _parse_values(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep K and k apart
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SECTIONS[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            values[key] = _convert(key, raw)
    return values


def load(path, kind: str | None = None) -> ExperimentConfig:
    """Read a config file; ``kind`` fills in a missing kind and must match an explicit one."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    values = _parse_values(text)
    if kind is not None:
        if "kind" in values and values["kind"] != kind:
            raise ConfigError(f"kind: config says {values['kind']!r}, command line says {kind!r}")
        values["kind"] = kind
    return ExperimentConfig(**values)


def validate(cfg: ExperimentConfig) -> list[str]:
    """Violations as ``"field: reason"`` strings; empty when the config is usable."""
    out = []

    def need(cond, name, msg):
        if not cond:
            out.append(f"{name}: {msg}")

    need(cfg.kind in KINDS, "kind", f"must be one of {', '.join(KINDS)}")
    need(2 <= cfg.n <= 6, "n", "must lie in [2, 6]")
    need(2 <= cfg.k <= cfg.n, "k", "must satisfy 2 <= k <= n")
    need(cfg.K >= 4, "K", "must be >= 4")
    swept = list(cfg.K_values) if cfg.kind == "bg" else []
    for K in [cfg.K] + swept:
        if K ** (2 * cfg.n - 2) > CAP_BUDGET:
            out.append(f"K: budget K^(2n-2) = {K ** (2 * cfg.n - 2)} exceeds {CAP_BUDGET}")
            break
    if cfg.R is not None:
        need(cfg.R >= cfg.K and abs(cfg.R / cfg.K - round(cfg.R / cfg.K)) < 1e-12, "R", "must be a multiple of K, >= K")
    need(all(K >= 4 for K in cfg.K_values), "K_values", "entries must be >= 4")
    need(cfg.points_per_axis is None or cfg.points_per_axis >= 1, "points_per_axis", "must be positive")
    need(cfg.rule in ("midpoint", "gauss-legendre"), "rule", "must be midpoint or gauss-legendre")
    need(cfg.nyquist_factor >= 4, "nyquist_factor", "must be >= 4")
    need(cfg.samples >= 10_000, "samples", "must be >= 1e4")
    need(cfg.trials >= 1, "trials", "must be >= 1")
    need(all(0 < d <= 1 for d in cfg.deltas), "delta", "every delta must lie in (0, 1]")
    need(0 <= cfg.nu <= 0.5, "nu", "must lie in [0, 0.5]")
    need(cfg.c > 0, "c", "must be positive")
    need(cfg.family_size >= 1, "family_size", "must be >= 1")
    need(0 < cfg.induction_nu <= 1, "induction_nu", "must lie in (0, 1]")
    need(0 < cfg.induction_delta <= cfg.induction_nu, "induction_delta", "must satisfy 0 < delta <= nu")
    need(cfg.ratio_bound > 0, "ratio_bound", "must be positive")
    need(len(cfg.t_values) >= 6 and all(t > 0 for t in cfg.t_values), "t_values", "need >= 6 positive values")
    need(cfg.sigma > 0, "sigma", "must be positive")
    need(cfg.amplitudes >= 1 and cfg.sweep_amplitudes >= 1, "amplitudes", "must be >= 1")
    need(cfg.comparability_bound > 0 and cfg.narrow_bound > 0, "comparability_bound", "bounds must be positive")
    need(cfg.size >= 2 and cfg.size % 2 == 0, "size", "must be even and >= 2")
    need(cfg.workers >= 1, "workers", "must be >= 1")
    return out
