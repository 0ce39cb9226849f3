"""Linear world models ``(F, b)``.

Gradient-descent model learning fills ``F`` in quickly: every update writes
the whole support of ``phi' - F phi`` into each active column. ``F`` is
therefore stored densely, but only over the features the model has seen.
:class:`FeatureSlots` maps those features to compact slots. Unseen features
have all-zero rows and columns. Entries with ``|F[i, j]| <= drop_tol`` are
stored as exact zeros and count as absent in row and column queries.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels as K
from .errors import SingularSystemError
from .features import SparseVec

__all__ = [
    "DROP_TOL",
    "FeatureSlots",
    "LinearModel",
    "ActionModelSet",
    "TransitionDataset",
    "predict",
    "update_model",
    "fit_least_squares",
    "row_nonzeros",
    "column",
    "save_model",
    "load_model",
]

DROP_TOL = 1e-8
COND_LIMIT = 1e12
_FORMAT = "lineardyna-model v1"


class FeatureSlots:
    """Compact numbering of the features seen so far.

    ``slot[i]`` is the slot of feature ``i`` or -1; ``feat[s]`` is the
    feature in slot ``s``; ``order`` lists the live slots by increasing
    feature index. Several models may share one instance so that their
    matrices line up (per-action models do).
    """

    def __init__(self, n: int, capacity: int = 32):
        self.n = int(n)
        self.slot = np.full(self.n, -1, dtype=np.int64)
        self.feat = np.zeros(max(1, min(capacity, self.n)), dtype=np.int64)
        self.order = np.zeros(0, dtype=np.int64)
        self.k = 0

    @property
    def capacity(self) -> int:
        return len(self.feat)

    def features(self) -> np.ndarray:
        return self.feat[: self.k]

    def ensure(self, idx: np.ndarray) -> None:
        """Give every feature in ``idx`` a slot."""
        if idx.size == 0:
            return
        new = idx[self.slot[idx] < 0]
        if new.size == 0:
            return
        new = np.unique(new)
        need = self.k + new.size
        if need > self.capacity:
            cap = min(self.n, max(need, 2 * self.capacity))
            feat = np.zeros(cap, dtype=np.int64)
            feat[: self.k] = self.feat[: self.k]
            self.feat = feat
        self.feat[self.k:need] = new
        self.slot[new] = np.arange(self.k, need)
        self.k = need
        self.order = np.argsort(self.feat[: self.k], kind="stable").astype(np.int64)

    @classmethod
    def from_features(cls, n: int, features) -> "FeatureSlots":
        """Slot map holding ``features`` in the given slot order."""
        features = np.asarray(features, dtype=np.int64)
        distinct = len(np.unique(features)) == len(features)
        if not distinct or (features.size and not 0 <= features.min() <= features.max() < n):
            raise ValueError("slot features must be distinct indices below n")
        s = cls(n, max(32, len(features)))
        k = len(features)
        s.feat[:k] = features
        s.slot[features] = np.arange(k)
        s.k = k
        s.order = np.argsort(features, kind="stable").astype(np.int64)
        return s

    def same_layout(self, other: "FeatureSlots") -> bool:
        return self.n == other.n and self.k == other.k and np.array_equal(self.features(), other.features())

    def copy(self) -> "FeatureSlots":
        c = FeatureSlots(self.n, 1)
        c.slot = self.slot.copy()
        c.feat = self.feat.copy()
        c.order = self.order.copy()
        c.k = self.k
        return c


class LinearModel:
    """Forward matrix ``F`` (n x n) and reward vector ``b``."""

    def __init__(self, n: int, drop_tol: float = DROP_TOL, slots: FeatureSlots | None = None):
        if n <= 0:
            raise ValueError("model dimension must be positive")
        if drop_tol < 0:
            raise ValueError("drop tolerance must be non-negative")
        self.n = int(n)
        self.drop_tol = float(drop_tol)
        self.b = np.zeros(self.n)
        self.slots = slots if slots is not None else FeatureSlots(self.n)
        if self.slots.n != self.n:
            raise ValueError("slot map dimension differs from model dimension")
        self._F = np.zeros((self.slots.capacity, self.slots.capacity), order="F")

    def mat(self) -> np.ndarray:
        """Slot-indexed storage, grown to the current slot capacity.

        Column-major, since column pulls dominate planning.
        """
        cap = self.slots.capacity
        if self._F.shape[0] < cap:
            F = np.zeros((cap, cap), order="F")
            old = self._F.shape[0]
            F[:old, :old] = self._F
            self._F = F
        return self._F

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dense(cls, F, b, drop_tol: float = DROP_TOL) -> "LinearModel":
        F = np.asarray(F, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        n = len(b)
        if F.shape != (n, n):
            raise ValueError(f"F has shape {F.shape}, expected {(n, n)}")
        m = cls(n, drop_tol)
        m.b[:] = b
        keep = np.abs(F) > drop_tol
        rows, cols = np.nonzero(keep)
        m.slots.ensure(np.union1d(rows, cols).astype(np.int64))
        feats = m.slots.features()
        m.mat()[: len(feats), : len(feats)] = np.where(keep, F, 0.0)[np.ix_(feats, feats)]
        return m

    def copy(self) -> "LinearModel":
        """Deep copy with its own slot map."""
        m = LinearModel(self.n, self.drop_tol, self.slots.copy())
        m.b = self.b.copy()
        m._F = self.mat().copy(order="F")
        return m

    def _set(self, i: int, j: int, v: float) -> None:
        if abs(v) <= self.drop_tol:
            v = 0.0
            if self.slots.slot[i] < 0 or self.slots.slot[j] < 0:
                return
        self.slots.ensure(np.array([i, j], dtype=np.int64))
        slot = self.slots.slot
        self.mat()[slot[i], slot[j]] = v

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(i)

    # -- queries -----------------------------------------------------------

    def get(self, i: int, j: int) -> float:
        self._check_index(i)
        self._check_index(j)
        si, sj = self.slots.slot[i], self.slots.slot[j]
        if si < 0 or sj < 0:
            return 0.0
        return float(self.mat()[si, sj])

    def column(self, j: int) -> SparseVec:
        """``F e_j``."""
        self._check_index(j)
        sj = self.slots.slot[j]
        if sj < 0:
            return SparseVec(self.n)
        k = self.slots.k
        col = self.mat()[:k, sj]
        return _vec_from_slots(self.n, self.slots, col)

    def row_nonzeros(self, i: int) -> list[tuple[int, float]]:
        """Stored ``(j, F[i, j])`` pairs of row ``i`` by increasing ``j``."""
        self._check_index(i)
        si = self.slots.slot[i]
        if si < 0:
            return []
        row = self.mat()[si]
        feat = self.slots.feat
        return [(int(feat[s]), float(row[s])) for s in self.slots.order if row[s] != 0.0]

    def predecessors(self, i: int) -> list[int]:
        """Features ``j`` with ``F[i, j] != 0``."""
        return [j for j, _ in self.row_nonzeros(i)]

    def nnz(self) -> int:
        k = self.slots.k
        return int(np.count_nonzero(self.mat()[:k, :k]))

    def triples(self) -> list[tuple[int, int, float]]:
        """All stored ``(i, j, F[i, j])`` sorted by ``(i, j)``."""
        k = self.slots.k
        si, sj = np.nonzero(self.mat()[:k, :k])
        feat = self.slots.feat
        out = [(int(feat[a]), int(feat[c]), float(self._F[a, c])) for a, c in zip(si, sj)]
        out.sort()
        return out

    def to_sparse(self) -> sp.csc_matrix:
        k = self.slots.k
        si, sj = np.nonzero(self.mat()[:k, :k])
        feat = self.slots.feat
        return sp.csc_matrix((self._F[si, sj], (feat[si], feat[sj])), shape=(self.n, self.n))

    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        F = np.zeros((self.n, self.n))
        feats = self.slots.features()
        k = len(feats)
        F[np.ix_(feats, feats)] = self.mat()[:k, :k]
        return F, self.b.copy()

    # -- prediction and learning --------------------------------------------

    def reward(self, phi: SparseVec) -> float:
        idx, val = phi.arrays
        return float(np.dot(self.b[idx], val)) if len(idx) else 0.0

    def predict(self, phi: SparseVec) -> tuple[SparseVec, float]:
        """``(F phi, b . phi)`` with entries of ``F phi`` at or below ``drop_tol`` omitted."""
        self._check(phi)
        k = self.slots.k
        out = np.zeros(k)
        idx, val = phi.arrays
        K.apply(self.mat(), k, self.slots.slot, idx, val, out)
        return _vec_from_slots(self.n, self.slots, out, self.drop_tol), self.reward(phi)

    def update(self, phi: SparseVec, r: float, phi_next: SparseVec, alpha: float) -> None:
        """One gradient step on squared prediction error for both ``F`` and ``b``."""
        self._check(phi)
        self._check(phi_next)
        if alpha < 0:
            raise ValueError("step size must be non-negative")
        if alpha == 0.0:
            return
        idx, val = phi.arrays
        idx2, val2 = phi_next.arrays
        self.slots.ensure(idx)
        self.slots.ensure(idx2)
        K.model_update(self.mat(), self.slots.k, self.slots.slot, self.b, idx, val, idx2, val2,
                       float(r), float(alpha), self.drop_tol)

    def _check(self, phi: SparseVec) -> None:
        if phi.dim != self.n:
            raise ValueError(f"feature dim {phi.dim} does not match model dim {self.n}")

    def __repr__(self) -> str:
        return f"LinearModel(n={self.n}, nnz={self.nnz()})"


def _vec_from_slots(n: int, slots: FeatureSlots, x: np.ndarray, tol: float = 0.0) -> SparseVec:
    order = slots.order
    keep = order[np.abs(x[order]) > tol]
    return SparseVec(n, slots.feat[keep].tolist(), x[keep].tolist())


def predict(m: LinearModel, phi: SparseVec) -> tuple[SparseVec, float]:
    return m.predict(phi)


def update_model(m: LinearModel, phi: SparseVec, r: float, phi_next: SparseVec, alpha: float) -> None:
    m.update(phi, r, phi_next, alpha)


def row_nonzeros(m: LinearModel, i: int) -> list[tuple[int, float]]:
    return m.row_nonzeros(i)


def column(m: LinearModel, j: int) -> SparseVec:
    return m.column(j)


@dataclass
class ActionModelSet:
    """One :class:`LinearModel` per discrete action, all of dimension ``n``."""

    models: list[LinearModel]

    def __post_init__(self):
        if not self.models:
            raise ValueError("need at least one action model")
        dims = {m.n for m in self.models}
        if len(dims) != 1:
            raise ValueError(f"action models disagree on dimension: {sorted(dims)}")
        shared = self.models[0].slots
        if all(m.slots is shared for m in self.models):
            return
        if all(m.slots.same_layout(shared) for m in self.models):
            for m in self.models:
                m.slots = shared
        else:
            self.models = _rehome(self.models)

    @classmethod
    def zeros(cls, n: int, n_actions: int, drop_tol: float = DROP_TOL) -> "ActionModelSet":
        slots = FeatureSlots(n)
        return cls([LinearModel(n, drop_tol, slots) for _ in range(n_actions)])

    @property
    def slots(self) -> FeatureSlots:
        return self.models[0].slots

    def matrices(self) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
        """Aligned slot storage and reward vectors of every action."""
        return tuple(m.mat() for m in self.models), tuple(m.b for m in self.models)

    @property
    def n(self) -> int:
        return self.models[0].n

    def __len__(self) -> int:
        return len(self.models)

    def __getitem__(self, a: int) -> LinearModel:
        return self.models[a]

    def __iter__(self):
        return iter(self.models)


def _rehome(models: list[LinearModel]) -> list[LinearModel]:
    """Copies of ``models`` that share one slot map."""
    slots = FeatureSlots(models[0].n)
    out = []
    for m in models:
        c = LinearModel(m.n, m.drop_tol, slots)
        c.b = m.b.copy()
        for i, j, v in m.triples():
            c._set(i, j, v)
        out.append(c)
    return out


@dataclass
class TransitionDataset:
    """A list of ``(phi, r, phi_next)`` triples of a common dimension."""

    dim: int
    transitions: list[tuple[SparseVec, float, SparseVec]] = field(default_factory=list)

    def append(self, phi: SparseVec, r: float, phi_next: SparseVec) -> None:
        if phi.dim != self.dim or phi_next.dim != self.dim:
            raise ValueError("transition dimension mismatch")
        self.transitions.append((phi, float(r), phi_next))

    def extend(self, items: Iterable[tuple[SparseVec, float, SparseVec]]) -> None:
        for phi, r, nxt in items:
            self.append(phi, r, nxt)

    def __len__(self) -> int:
        return len(self.transitions)

    def __iter__(self):
        return iter(self.transitions)

    @classmethod
    def from_dense(cls, phis, rewards, next_phis) -> "TransitionDataset":
        phis = np.atleast_2d(np.asarray(phis, dtype=float))
        next_phis = np.atleast_2d(np.asarray(next_phis, dtype=float))
        ds = cls(phis.shape[1])
        for x, r, y in zip(phis, np.ravel(rewards), next_phis):
            ds.append(SparseVec.from_dense(x), float(r), SparseVec.from_dense(y))
        return ds

    def design(self) -> tuple[sp.csr_matrix, np.ndarray, sp.csr_matrix]:
        """Sparse ``(Phi, r, Phi_next)`` with one row per transition."""

        def stack(vecs: Sequence[SparseVec]) -> sp.csr_matrix:
            indptr = np.zeros(len(vecs) + 1, dtype=np.int64)
            np.cumsum([len(v) for v in vecs], out=indptr[1:])
            idx = np.fromiter((i for v in vecs for i in v.indices), dtype=np.int64, count=indptr[-1])
            val = np.fromiter((x for v in vecs for x in v.values), dtype=float, count=indptr[-1])
            return sp.csr_matrix((val, idx, indptr), shape=(len(vecs), self.dim))

        phis = [t[0] for t in self.transitions]
        nexts = [t[2] for t in self.transitions]
        r = np.array([t[1] for t in self.transitions], dtype=float)
        return stack(phis), r, stack(nexts)

    def moments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense ``C = sum phi phi^T``, ``D = sum phi phi'^T`` and ``rbar = sum phi r``."""
        if not self.transitions:
            raise ValueError("empty dataset")
        Phi, r, Phi2 = self.design()
        C = (Phi.T @ Phi).toarray()
        D = (Phi.T @ Phi2).toarray()
        rbar = Phi.T @ r
        return C, D, np.asarray(rbar).ravel()


def _solve_checked(A: np.ndarray, B: np.ndarray, what: str, err=SingularSystemError) -> np.ndarray:
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise err(f"{what} is singular (condition number {cond:.3g})")
    return np.linalg.solve(A, B)


def fit_least_squares(data: TransitionDataset, drop_tol: float = DROP_TOL) -> LinearModel:
    """Least-squares model of a dataset: ``F^T = C^-1 D`` and ``b = C^-1 rbar``."""
    C, D, rbar = data.moments()
    sol = _solve_checked(C, np.column_stack([D, rbar]), "feature covariance C")
    Ft, b = sol[:, :-1], sol[:, -1]
    scale = max(np.linalg.norm(D), np.linalg.norm(C) * np.linalg.norm(Ft), 1e-300)
    if np.linalg.norm(C @ Ft - D) > 1e-8 * scale:
        raise SingularSystemError("normal equations not satisfied to tolerance; C is ill-conditioned")
    return LinearModel.from_dense(Ft.T, b, drop_tol)


# --------------------------------------------------------------------------
# Snapshot text format
# --------------------------------------------------------------------------

def dumps_model(m: LinearModel) -> str:
    buf = io.StringIO()
    buf.write(f"# {_FORMAT}\n")
    buf.write(f"n {m.n}\n")
    buf.write(f"drop_tol {m.drop_tol!r}\n")
    # slot order fixes the summation order of column products, so resumed runs stay bit-identical
    feats = m.slots.features()
    buf.write(f"slots {len(feats)}\n")
    if len(feats):
        buf.write(" ".join(str(int(f)) for f in feats) + "\n")
    nzb = [(i, float(m.b[i])) for i in np.flatnonzero(m.b)]
    buf.write(f"b {len(nzb)}\n")
    for i, v in nzb:
        buf.write(f"{i} {v!r}\n")
    t = m.triples()
    buf.write(f"F {len(t)}\n")
    for i, j, v in t:
        buf.write(f"{i} {j} {v!r}\n")
    return buf.getvalue()


def loads_model(text: str) -> LinearModel:
    lines = iter(text.splitlines())
    header = next(lines, "")
    if header.strip() != f"# {_FORMAT}":
        raise ValueError(f"not a model snapshot (header {header!r})")

    def field_line(name):
        key, val = next(lines).split()
        if key != name:
            raise ValueError(f"expected {name!r}, found {key!r}")
        return val

    n = int(field_line("n"))
    drop_tol = float(field_line("drop_tol"))
    k = int(field_line("slots"))
    feats = [int(f) for f in next(lines).split()] if k else []
    if len(feats) != k:
        raise ValueError("slot line does not match its count")
    m = LinearModel(n, drop_tol, FeatureSlots.from_features(n, feats))
    for _ in range(int(field_line("b"))):
        i, v = next(lines).split()
        m.b[int(i)] = float(v)
    entries = [next(lines).split() for _ in range(int(field_line("F")))]
    if entries:
        ij = np.array([(int(i), int(j)) for i, j, _ in entries], dtype=np.int64)
        slot = m.slots.slot
        if np.any(slot[ij] < 0):
            raise ValueError("F entry outside the listed slots")
        m.mat()[slot[ij[:, 0]], slot[ij[:, 1]]] = [float(v) for _, _, v in entries]
    return m


def save_model(m: LinearModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_model(m))


def load_model(path: str | os.PathLike) -> LinearModel:
    with open(path, encoding="ascii") as fh:
        return loads_model(fh.read())
