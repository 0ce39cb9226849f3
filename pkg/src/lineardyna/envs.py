"""Benchmark environments: the generalized Boyan chain and Mountain Car.

Both are small mutable state machines driven by an explicit
``numpy.random.Generator``; the pure step functions are exposed as well so
they can be tested and reused without an environment object.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import BOYAN_N_STATES

__all__ = [
    "make_rng",
    "boyan_step",
    "boyan_true_value",
    "BoyanChain",
    "MCarState",
    "mcar_step",
    "mcar_eval_policy",
    "MountainCar",
    "MCAR_START",
    "MCAR_STEP_CAP",
]


def make_rng(seed) -> np.random.Generator:
    """A PCG64 generator; ``seed`` may be an int, a tuple of ints or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if isinstance(seed, (tuple, list)):
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed))))
    return np.random.Generator(np.random.PCG64(seed))


# --------------------------------------------------------------------------
# Boyan chain
# --------------------------------------------------------------------------

def boyan_step(s: int, rng: np.random.Generator) -> tuple[int, float, bool]:
    if s <= 0:
        raise ValueError("cannot step from the terminal state")
    if s > BOYAN_N_STATES:
        raise ValueError(f"state {s} out of range")
    if s == 1:
        return 0, 0.0, True
    if s == 2:
        return 1, -2.0, False
    nxt = s - 1 if rng.random() < 0.5 else s - 2
    return nxt, -3.0, False


def boyan_true_value(s: int) -> float:
    """Exact undiscounted value of state ``s``: ``-2(s-1)`` for ``s >= 1``."""
    if not 0 <= s <= BOYAN_N_STATES:
        raise ValueError(f"state {s} out of range")
    return 0.0 if s == 0 else -2.0 * (s - 1)


class BoyanChain:
    start = BOYAN_N_STATES

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.state = self.start

    def reset(self) -> int:
        self.state = self.start
        return self.state

    def step(self) -> tuple[int, float, bool]:
        self.state, r, done = boyan_step(self.state, self.rng)
        return self.state, r, done


# --------------------------------------------------------------------------
# Mountain Car
# --------------------------------------------------------------------------

POS_MIN, POS_MAX = -1.2, 0.5
VEL_MAX = 0.07
GOAL = 0.5
MCAR_START = (-0.5, 0.0)
MCAR_STEP_CAP = 10_000


@dataclass(frozen=True)
class MCarState:
    position: float
    velocity: float

    def __post_init__(self):
        if not (POS_MIN <= self.position <= POS_MAX and -VEL_MAX <= self.velocity <= VEL_MAX):
            raise ValueError(f"state out of bounds: {self}")

    @property
    def terminal(self) -> bool:
        return self.position >= GOAL


def mcar_step(s: MCarState, action: int) -> tuple[MCarState, float, bool]:
    if s.terminal:
        raise ValueError("cannot step from a terminal state")
    if action not in (0, 1, 2):
        raise ValueError(f"invalid action {action}")
    v = s.velocity + 0.001 * (action - 1) - 0.0025 * math.cos(3.0 * s.position)
    v = min(max(v, -VEL_MAX), VEL_MAX)
    p = s.position + v
    if p < POS_MIN:
        p, v = POS_MIN, 0.0
    elif p > POS_MAX:
        p = POS_MAX
    nxt = MCarState(p, v)
    return nxt, -1.0, nxt.terminal


def mcar_eval_policy(s: MCarState, rng: np.random.Generator, noise: float = 0.1) -> int:
    """Accelerate along the current velocity; with prob. ``noise`` act uniformly at random.

    Zero velocity counts as forward. One uniform draw decides the switch and,
    only when switching, a second draw picks the random action.
    """
    if rng.random() < noise:
        return int(rng.integers(3))
    return 0 if s.velocity < 0.0 else 2


class MountainCar:
    def __init__(self, step_cap: int = MCAR_STEP_CAP):
        self.step_cap = step_cap
        self.state = MCarState(*MCAR_START)
        self.t = 0

    def reset(self) -> MCarState:
        self.state = MCarState(*MCAR_START)
        self.t = 0
        return self.state

    @property
    def truncated(self) -> bool:
        return self.t >= self.step_cap and not self.state.terminal

    def step(self, action: int) -> tuple[MCarState, float, bool]:
        if self.t >= self.step_cap:
            raise RuntimeError("episode already truncated at the step cap")
        self.state, r, done = mcar_step(self.state, action)
        self.t += 1
        return self.state, r, done
