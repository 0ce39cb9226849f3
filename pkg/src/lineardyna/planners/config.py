from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import DynaControlMG, LinearSarsa
from .policy_eval import TD0, DynaMG, DynaPWMA, DynaRandom

POLICY_EVAL_ALGORITHMS = ("td0", "dyna-random", "dyna-pwma", "dyna-mg")
CONTROL_ALGORITHMS = ("sarsa", "dyna-control-mg")


@dataclass(frozen=True)
class PlannerConfig:
    """Planner hyperparameters. Step sizes are supplied per call by the caller's schedule."""

    gamma: float = 1.0
    p: int = 1
    epsilon: float = 0.1
    mu: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.p < 0:
            raise ValueError(f"p must be >= 0, got {self.p}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")


def make_planner(algorithm: str, n: int, cfg: PlannerConfig, rng: np.random.Generator,
                 n_actions: int = 3):
    if algorithm == "td0":
        return TD0(n, cfg.gamma)
    if algorithm == "dyna-random":
        return DynaRandom(n, cfg.gamma, cfg.p, rng=rng, mu=cfg.mu)
    if algorithm == "dyna-pwma":
        return DynaPWMA(n, cfg.gamma, cfg.p)
    if algorithm == "dyna-mg":
        return DynaMG(n, cfg.gamma, cfg.p)
    if algorithm == "sarsa":
        return LinearSarsa(n, n_actions, cfg.gamma, cfg.epsilon, rng=rng)
    if algorithm == "dyna-control-mg":
        return DynaControlMG(n, n_actions, cfg.gamma, cfg.epsilon, cfg.p, rng=rng)
    raise ValueError(f"unknown algorithm {algorithm!r}")
