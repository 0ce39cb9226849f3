"""Linear Dyna for control with per-action models.

The agent learns state values ``theta`` and one linear model per action.
Actions are chosen by a one-step lookahead through the action models.
:class:`LinearSarsa` is that agent without planning; :class:`DynaControlMG`
adds MG-style prioritized sweeping with a max-over-actions backup.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .. import _kernels as K
from ..features import SparseVec
from ..model import ActionModelSet
from .queue import SweepQueue
from .updates import diverged, td0_update

__all__ = ["greedy_action", "action_values", "LinearSarsa", "DynaControlMG", "dyna_control_step"]


def action_values(theta, models: ActionModelSet, phi: SparseVec, gamma: float) -> np.ndarray:
    """``b_a . phi + gamma * theta . (F_a phi)`` for every action ``a``."""
    if phi.dim != models.n or len(theta) != models.n:
        raise ValueError("dimension mismatch between theta, models and phi")
    theta = np.asarray(theta, dtype=np.float64)
    Fs, bs = models.matrices()
    slots = models.slots
    idx, val = phi.arrays
    out = np.empty(len(models))
    K.lookahead(Fs, bs, slots.feat, slots.k, slots.slot, theta, float(gamma), idx, val, out)
    return out


def greedy_action(theta, models: ActionModelSet, phi: SparseVec, gamma: float) -> int:
    """Argmax of the model lookahead; ties go to the lowest action index."""
    if len(models) == 0:
        raise ValueError("empty action set")
    # argmax returns the first maximum
    return int(np.argmax(action_values(theta, models, phi, gamma)))


class LinearSarsa:
    """On-policy TD(0) on state values with epsilon-greedy lookahead action selection."""

    name = "sarsa"

    def __init__(self, n: int, n_actions: int, gamma: float = 1.0, epsilon: float = 0.1,
                 rng: np.random.Generator | None = None, models: ActionModelSet | None = None):
        self.n = int(n)
        self.gamma = float(gamma)
        self.epsilon = float(epsilon)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.models = models if models is not None else ActionModelSet.zeros(n, n_actions)
        if self.models.n != self.n or len(self.models) != n_actions:
            raise ValueError("action models do not match (n, n_actions)")
        self.n_actions = int(n_actions)
        self._theta = np.zeros(self.n)
        self.updates = 0
        self.phi: SparseVec | None = None

    @property
    def theta(self) -> np.ndarray:
        return self._theta.copy()

    @theta.setter
    def theta(self, values) -> None:
        values = np.array(values, dtype=np.float64).ravel()
        if len(values) != self.n:
            raise ValueError(f"theta must have length {self.n}")
        self._theta = values

    def act(self, phi: SparseVec) -> int:
        # always consume the exploration draw so the stream does not depend on the branch taken
        if self.rng.random() < self.epsilon:
            return int(self.rng.integers(self.n_actions))
        return greedy_action(self._theta, self.models, phi, self.gamma)

    def update(self, phi: SparseVec, a: int, r: float, phi_next: SparseVec, alpha: float) -> float:
        self.updates += 1
        delta = td0_update(self._theta, phi, r, phi_next, self.gamma, alpha, step=self.updates)
        self.models[a].update(phi, r, phi_next, alpha)
        return delta


class DynaControlMG(LinearSarsa):
    name = "dyna-control-mg"

    def __init__(self, n: int, n_actions: int, gamma: float = 1.0, epsilon: float = 0.1,
                 p: int = 1, rng: np.random.Generator | None = None,
                 models: ActionModelSet | None = None, queue: SweepQueue | None = None):
        super().__init__(n, n_actions, gamma, epsilon, rng, models)
        if p < 0:
            raise ValueError("planning steps p must be >= 0")
        self.p = int(p)
        self.queue = queue if queue is not None else SweepQueue(n)
        if self.queue.n != self.n:
            raise ValueError("queue and theta dimensions differ")

    def backup_error(self, j: int) -> float:
        """``max_a [b_a[j] + gamma theta . F_a e_j] - theta[j]``."""
        Fs, bs = self.models.matrices()
        slots = self.models.slots
        return float(K.max_backup_error(Fs, bs, slots.feat, slots.k, slots.slot,
                                        self._theta, self.gamma, j))

    def update(self, phi, a, r, phi_next, alpha) -> float:
        delta = super().update(phi, a, r, phi_next, alpha)
        if self.p > 0:
            push = self.queue.push
            for i, x in phi.items():
                push(i, abs(delta * x))
            self.sweep(self.p, alpha)
        return delta

    def sweep(self, k: int, alpha: float) -> int:
        """Pop up to ``k`` features and back up every predecessor under any action."""
        Fs, bs = self.models.matrices()
        slots, q = self.models.slots, self.queue
        pops, done, bad = K.control_sweep(Fs, bs, slots.feat, slots.k, slots.slot, slots.order, self._theta,
                                          self.gamma, float(alpha), q.prio, q.size, q.floor, int(k))
        start = self.updates
        self.updates += int(done)
        if bad >= 0:
            raise diverged(self._theta, bad, start + int(done))
        return int(pops)


def dyna_control_step(agent: LinearSarsa, env, featurize: Callable[[object], SparseVec],
                      alpha: float) -> tuple[float, bool]:
    """One interaction: act from ``agent.phi``, step ``env``, learn, and advance ``agent.phi``.

    Terminal transitions use the empty next-feature vector; ``agent.phi`` is
    then left as ``None`` until the caller starts a new episode.
    """
    phi = agent.phi
    if phi is None:
        raise ValueError("agent has no current feature vector; start an episode first")
    a = agent.act(phi)
    state, r, terminal = env.step(a)
    phi_next = SparseVec(agent.n) if terminal else featurize(state)
    agent.update(phi, a, r, phi_next, alpha)
    agent.phi = None if terminal else phi_next
    return r, terminal
