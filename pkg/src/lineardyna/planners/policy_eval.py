"""Linear Dyna for policy evaluation: random-sample, PWMA and MG planners.

All planners share the same real-experience step (a TD(0) update followed
by one gradient step on the model) and differ only in which unit-basis
backups they perform afterwards. A backup at feature ``j`` is the TD(0)
update on the imagined transition ``(e_j, b[j], F e_j)``, which only moves
``theta[j]``.
"""
from __future__ import annotations

import numpy as np

from .. import _kernels as K
from ..features import SparseVec
from ..model import LinearModel
from .queue import SweepQueue
from .updates import diverged, td0_update

__all__ = ["TD0", "DynaRandom", "DynaPWMA", "DynaMG"]


class TD0:
    """Model-free linear TD(0); the baseline every Dyna planner reduces to at ``p = 0``."""

    name = "td0"

    def __init__(self, n: int, gamma: float = 1.0):
        self.n = int(n)
        self.gamma = float(gamma)
        self._theta = np.zeros(self.n)
        self.updates = 0

    @property
    def theta(self) -> np.ndarray:
        return self._theta.copy()

    @theta.setter
    def theta(self, values) -> None:
        values = np.array(values, dtype=np.float64).ravel()
        if len(values) != self.n:
            raise ValueError(f"theta must have length {self.n}")
        self._theta = values

    def value(self, phi: SparseVec) -> float:
        idx, val = phi.arrays
        return float(K.sparse_dot(self._theta, idx, val))

    def _real_update(self, phi, r, phi_next, alpha) -> float:
        self.updates += 1
        return td0_update(self._theta, phi, r, phi_next, self.gamma, alpha, step=self.updates)

    def step(self, phi: SparseVec, r: float, phi_next: SparseVec, alpha: float) -> float:
        """Process one real transition; returns its TD error."""
        return self._real_update(phi, r, phi_next, alpha)


class _Dyna(TD0):
    def __init__(self, n: int, gamma: float = 1.0, p: int = 1,
                 model: LinearModel | None = None, learn_model: bool = True):
        super().__init__(n, gamma)
        if p < 0:
            raise ValueError("planning steps p must be >= 0")
        self.p = int(p)
        self.model = model if model is not None else LinearModel(n)
        if self.model.n != self.n:
            raise ValueError("model and theta dimensions differ")
        self.learn_model = learn_model

    def _real_update(self, phi, r, phi_next, alpha) -> float:
        delta = super()._real_update(phi, r, phi_next, alpha)
        if self.learn_model:
            self.model.update(phi, r, phi_next, alpha)
        return delta

    def _args(self):
        m = self.model
        return m.mat(), m.slots.feat, m.slots.order, m.slots.k, m.slots.slot

    def basis_error(self, j: int) -> float:
        """TD error of the imagined transition from ``e_j``: ``b[j] + gamma theta.F e_j - theta[j]``."""
        F, feat, order, k, slot = self._args()
        return float(K.basis_error(F, feat, k, slot, self.model.b, self._theta, self.gamma, j))

    def residual(self) -> np.ndarray:
        """``b + (gamma F^T - I) theta``; zero exactly at the planning fixed point."""
        m, th = self.model, self._theta
        feats = m.slots.features()
        k = len(feats)
        out = m.b - th
        out[feats] += self.gamma * (m.mat()[:k, :k].T @ th[feats])
        return out

    def _finish(self, done: int, bad: int) -> None:
        start = self.updates
        self.updates += int(done)
        if bad >= 0:
            raise diverged(self._theta, bad, start + int(done))


class DynaRandom(_Dyna):
    """Dyna with planning samples drawn as unit basis vectors from a distribution ``mu``.

    ``mu`` is ``None`` for uniform sampling or a weight vector over the
    ``n`` basis indices. ``rule`` selects the planning update: ``"td0"`` or
    the residual-gradient ``"rg"``. Real-experience updates are always TD(0).
    """

    name = "dyna-random"

    def __init__(self, n: int, gamma: float = 1.0, p: int = 1, rng: np.random.Generator | None = None,
                 mu=None, rule: str = "td0", model: LinearModel | None = None, learn_model: bool = True):
        super().__init__(n, gamma, p, model, learn_model)
        if rule not in ("td0", "rg"):
            raise ValueError(f"unknown planning rule {rule!r}")
        self.rule = rule
        self.rng = rng if rng is not None else np.random.default_rng()
        self._cdf = None
        if mu is not None:
            w = np.asarray(mu, dtype=float)
            if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("mu must be a non-negative weight vector over the n basis indices")
            self._cdf = np.cumsum(w / w.sum())

    def sample_indices(self, k: int) -> np.ndarray:
        if self._cdf is None:
            return self.rng.integers(self.n, size=k).astype(np.int64)
        js = np.searchsorted(self._cdf, self.rng.random(k), side="right")
        return np.minimum(js, self.n - 1).astype(np.int64)

    def plan(self, k: int, alpha: float) -> None:
        if k <= 0:
            return
        js = self.sample_indices(k)
        kernel = K.basis_backups if self.rule == "td0" else K.rg_basis_backups
        F, feat, order, kk, slot = self._args()
        done, bad = kernel(F, feat, kk, slot, self.model.b, self._theta, self.gamma, float(alpha), js)
        self._finish(done, bad)

    def step(self, phi, r, phi_next, alpha) -> float:
        delta = self._real_update(phi, r, phi_next, alpha)
        self.plan(self.p, alpha)
        return delta


class _Prioritized(_Dyna):
    _sweep_kernel = None

    def __init__(self, n: int, gamma: float = 1.0, p: int = 1,
                 model: LinearModel | None = None, learn_model: bool = True,
                 queue: SweepQueue | None = None):
        super().__init__(n, gamma, p, model, learn_model)
        self.queue = queue if queue is not None else SweepQueue(n)
        if self.queue.n != self.n:
            raise ValueError("queue and theta dimensions differ")

    def sweep(self, k: int, alpha: float) -> int:
        """Pop up to ``k`` features; returns the number popped."""
        F, feat, order, kk, slot = self._args()
        q = self.queue
        pops, done, bad = type(self)._sweep_kernel(
            F, feat, kk, slot, order, self.model.b, self._theta, self.gamma,
            float(alpha), q.prio, q.size, q.floor, int(k))
        self._finish(done, bad)
        return int(pops)

    def plan_to_exhaustion(self, alpha: float, max_pops: int = 10_000_000) -> int:
        """Seed every feature, then pop until the queue empties; returns pops used."""
        self._seed_all()
        return self.sweep(max_pops, alpha)

    def step(self, phi, r, phi_next, alpha) -> float:
        delta = self._real_update(phi, r, phi_next, alpha)
        self._seed(phi, delta)
        if self.p > 0:
            self.sweep(self.p, alpha)
        return delta


class DynaPWMA(_Prioritized):
    """Prioritized sweeping that queues the predecessors of every visited feature."""

    name = "dyna-pwma"
    _sweep_kernel = K.pwma_sweep

    def _seed(self, phi, delta) -> None:
        F, feat, order, k, slot = self._args()
        q = self.queue
        idx, val = phi.arrays
        K.pwma_seed(F, feat, k, slot, order, idx, val, float(delta), q.prio, q.size, q.floor)

    def _seed_all(self) -> None:
        for j, d in enumerate(self.residual()):
            self.queue.push(j, abs(d))


class DynaMG(_Prioritized):
    """Prioritized sweeping that queues visited features and backs up their predecessors on pop."""

    name = "dyna-mg"
    _sweep_kernel = K.mg_sweep

    def _seed(self, phi, delta) -> None:
        push = self.queue.push
        for i, x in phi.items():
            push(i, abs(delta * x))

    def _seed_all(self) -> None:
        res = np.abs(self.residual())
        for i in range(self.n):
            preds = self.model.predecessors(i)
            if preds:
                self.queue.push(i, float(res[preds].max()))
