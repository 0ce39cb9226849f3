"""Experiment configuration files.

The format is flat ``section.key = value`` lines; ``#`` starts a comment.
In sweep files any value may be a comma-separated list, and the sweep runs
the cartesian product of all lists. Unknown keys are errors.
"""
from __future__ import annotations

import hashlib
import itertools
import os
from dataclasses import asdict, dataclass, fields, replace

from ..errors import ConfigError
from ..features import TileCoder
from ..planners.config import CONTROL_ALGORITHMS, POLICY_EVAL_ALGORITHMS, PlannerConfig

ENVIRONMENTS = ("boyan", "mountain-car")

# config key -> (ExperimentConfig field, parser)
_KEYS = {
    "env.name": ("env", str),
    "env.noise": ("noise", float),
    "env.step_cap": ("step_cap", int),
    "features.tilings": ("tilings", int),
    "features.grid": ("grid", int),
    "features.size": ("hash_size", int),
    "features.seed": ("hash_seed", int),
    "alg.name": ("algorithm", str),
    "alg.p": ("p", int),
    "alg.gamma": ("gamma", float),
    "alg.epsilon": ("epsilon", float),
    "schedule.kind": ("schedule", str),
    "schedule.alpha0": ("alpha0", float),
    "schedule.n0": ("n0", float),
    "run.episodes": ("episodes", int),
    "run.seeds": ("seeds", int),
    "run.base_seed": ("base_seed", int),
    "eval.every": ("eval_every", int),
    "eval.episodes": ("eval_episodes", int),
    "eval.seed": ("eval_seed", int),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}


@dataclass(frozen=True)
class ExperimentConfig:
    env: str = "boyan"
    algorithm: str = "td0"
    alpha0: float = 0.1
    n0: float = 1000.0
    schedule: str = "decay"
    gamma: float = 1.0
    epsilon: float = 0.1
    p: int = 1
    episodes: int = 200
    seeds: int = 30
    base_seed: int = 0
    eval_every: int | None = None
    eval_episodes: int = 2000
    eval_seed: int = 20090101
    noise: float = 0.1
    step_cap: int = 10_000
    tilings: int = 10
    grid: int = 8
    hash_size: int = 10_000
    hash_seed: int = 0

    def __post_init__(self):
        if self.eval_every is None:
            every = 5 if self.env == "mountain-car" and not self.is_control else 1
            object.__setattr__(self, "eval_every", every)
        self.validate()

    def validate(self) -> None:
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"env.name must be one of {ENVIRONMENTS}, got {self.env!r}")
        known = POLICY_EVAL_ALGORITHMS + CONTROL_ALGORITHMS
        if self.algorithm not in known:
            raise ConfigError(f"alg.name must be one of {known}, got {self.algorithm!r}")
        if self.algorithm in CONTROL_ALGORITHMS and self.env != "mountain-car":
            raise ConfigError(f"control algorithm {self.algorithm!r} requires env.name = mountain-car")
        if self.schedule not in ("decay", "constant"):
            raise ConfigError("schedule.kind must be 'decay' or 'constant'")
        checks = [
            (self.alpha0 >= 0, "schedule.alpha0 must be >= 0"),
            (self.n0 > 0, "schedule.n0 must be > 0"),
            (0.0 <= self.gamma <= 1.0, "alg.gamma must lie in [0, 1]"),
            (0.0 <= self.epsilon <= 1.0, "alg.epsilon must lie in [0, 1]"),
            (0.0 <= self.noise <= 1.0, "env.noise must lie in [0, 1]"),
            (self.p >= 0, "alg.p must be >= 0"),
            (self.episodes >= 1, "run.episodes must be >= 1"),
            (self.seeds >= 1, "run.seeds must be >= 1"),
            (self.base_seed >= 0 and self.eval_seed >= 0, "seeds must be non-negative"),
            (self.eval_every >= 1, "eval.every must be >= 1"),
            (self.eval_episodes >= 1, "eval.episodes must be >= 1"),
            (self.step_cap >= 1, "env.step_cap must be >= 1"),
            (self.tilings >= 1 and self.grid >= 1 and self.hash_size >= 1, "feature sizes must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    @property
    def is_control(self) -> bool:
        return self.algorithm in CONTROL_ALGORITHMS

    def planner_config(self) -> PlannerConfig:
        return PlannerConfig(gamma=self.gamma, p=self.p, epsilon=self.epsilon)

    def tile_coder(self) -> TileCoder:
        return TileCoder(tilings=self.tilings, grid=self.grid, size=self.hash_size, seed=self.hash_seed)

    def to_text(self) -> str:
        """Canonical config text: every key, sorted."""
        d = asdict(self)
        return "".join(f"{_FIELD_TO_KEY[f]} = {d[f]!r}\n".replace("'", "")
                       for f in sorted(d, key=lambda f: _FIELD_TO_KEY[f]))

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def parse_entries(text: str) -> dict[str, list[str]]:
    """Parse config text into ``key -> list of raw values`` (lists come from commas)."""
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values = [v.strip() for v in val.split(",")]
        if not all(values):
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        out[key] = values
    return out


def _build(assignment: dict[str, str], overrides: dict) -> ExperimentConfig:
    kwargs = {}
    for key, raw in assignment.items():
        field, conv = _KEYS[key]
        try:
            kwargs[field] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str, **overrides) -> ExperimentConfig:
    entries = parse_entries(text)
    multi = [k for k, v in entries.items() if len(v) > 1]
    if multi:
        raise ConfigError(f"list values for {multi} are only allowed in sweep configs")
    return _build({k: v[0] for k, v in entries.items()}, overrides)


def expand_sweep(text: str, **overrides) -> list[tuple[dict[str, str], ExperimentConfig]]:
    """All grid cells of a sweep file as ``(varying key -> value, config)`` pairs, in file order."""
    entries = parse_entries(text)
    varying = [k for k, v in entries.items() if len(v) > 1]
    cells = []
    for combo in itertools.product(*(entries[k] for k in varying)):
        assignment = {k: v[0] for k, v in entries.items()}
        assignment.update(zip(varying, combo))
        cells.append((dict(zip(varying, combo)), _build(assignment, overrides)))
    return cells


def load_config(path: str | os.PathLike, **overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]
