"""Sparse feature vectors and the feature constructions used by the benchmarks.

Everything here is immutable once built. A :class:`SparseVec` stores its
nonzeros as two parallel tuples sorted by index, with numpy copies built on
first use for the compiled kernels.
"""
from __future__ import annotations

import hashlib
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "SparseVec",
    "dot",
    "unit_basis",
    "empty",
    "boyan_features",
    "boyan_feature_matrix",
    "TileCoder",
    "tile_code",
    "BOYAN_N_STATES",
    "BOYAN_N_FEATURES",
]

BOYAN_N_STATES = 98
BOYAN_N_FEATURES = 25
_BOYAN_WIDTH = 4


class SparseVec:
    """An n-dimensional real vector with few nonzero entries.

    Parameters
    ----------
    dim : int
        Ambient dimension.
    indices, values : sequences
        Nonzero entries. Indices must be strictly increasing and ``< dim``;
        values must be nonzero. Use :meth:`from_dict` when the input is not
        already canonical.
    """

    __slots__ = ("dim", "indices", "values", "_arrays")

    def __init__(self, dim: int, indices: Iterable[int] = (), values: Iterable[float] = ()):
        idx = tuple(int(i) for i in indices)
        val = tuple(float(v) for v in values)
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        if len(idx) != len(val):
            raise ValueError("indices and values differ in length")
        prev = -1
        for i, v in zip(idx, val):
            if i <= prev:
                raise ValueError("indices must be strictly increasing")
            if v == 0.0:
                raise ValueError(f"stored zero at index {i}")
            prev = i
        if idx and (idx[0] < 0 or idx[-1] >= dim):
            raise ValueError(f"index out of range for dim {dim}")
        self.dim = int(dim)
        self.indices = idx
        self.values = val
        self._arrays = None

    @classmethod
    def from_dict(cls, dim: int, entries: Mapping[int, float], tol: float = 0.0) -> "SparseVec":
        """Build from an index->value mapping, dropping entries with ``|v| <= tol``."""
        items = sorted((i, v) for i, v in entries.items() if abs(v) > tol)
        return cls(dim, [i for i, _ in items], [v for _, v in items])

    @classmethod
    def from_dense(cls, x, tol: float = 0.0) -> "SparseVec":
        x = np.asarray(x, dtype=float).ravel()
        nz = np.flatnonzero(np.abs(x) > tol)
        return cls(len(x), nz.tolist(), x[nz].tolist())

    def items(self):
        return zip(self.indices, self.values)

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Read-only ``(indices, values)`` as int64 and float64 arrays, built once."""
        if self._arrays is None:
            idx = np.array(self.indices, dtype=np.int64)
            val = np.array(self.values, dtype=np.float64)
            idx.flags.writeable = False
            val.flags.writeable = False
            self._arrays = (idx, val)
        return self._arrays

    def nnz(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __getitem__(self, i: int) -> float:
        if not 0 <= i < self.dim:
            raise IndexError(i)
        k = bisect_left(self.indices, i)
        if k < len(self.indices) and self.indices[k] == i:
            return self.values[k]
        return 0.0

    def to_dict(self) -> dict[int, float]:
        return dict(zip(self.indices, self.values))

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.dim)
        if self.indices:
            x[list(self.indices)] = self.values
        return x

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return (self.dim, self.indices, self.values) == (other.dim, other.indices, other.values)

    def __hash__(self) -> int:
        return hash((self.dim, self.indices, self.values))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {v:g}" for i, v in self.items())
        return f"SparseVec(dim={self.dim}, {{{body}}})"


def empty(dim: int) -> SparseVec:
    """The zero vector; used as the next-feature vector of terminal transitions."""
    return SparseVec(dim)


def dot(u: SparseVec, v: SparseVec) -> float:
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    if len(u.indices) > len(v.indices):
        u, v = v, u
    if not u.indices:
        return 0.0
    lookup = dict(zip(v.indices, v.values))
    total = 0.0
    for i, x in zip(u.indices, u.values):
        y = lookup.get(i)
        if y is not None:
            total += x * y
    return total


def unit_basis(i: int, n: int) -> SparseVec:
    if not 0 <= i < n:
        raise ValueError(f"basis index {i} out of range for dim {n}")
    return SparseVec(n, (i,), (1.0,))


def boyan_features(state: int) -> SparseVec:
    """Piecewise-linear interpolation features for the 98-state Boyan chain.

    Feature ``i`` peaks at state ``4*i`` and falls linearly to zero four
    states away, so each state activates at most two adjacent features.
    States 97 and 98 lie past the last anchor and only see feature 24.
    """
    if not 0 <= state <= BOYAN_N_STATES:
        raise ValueError(f"Boyan state {state} out of range 0..{BOYAN_N_STATES}")
    lo = min(state // _BOYAN_WIDTH, BOYAN_N_FEATURES - 1)
    entries = {}
    for i in (lo, lo + 1):
        if i < BOYAN_N_FEATURES:
            w = 1.0 - abs(state - _BOYAN_WIDTH * i) / _BOYAN_WIDTH
            if w > 0.0:
                entries[i] = w
    return SparseVec.from_dict(BOYAN_N_FEATURES, entries)


def boyan_feature_matrix() -> np.ndarray:
    """Dense (99, 25) matrix whose row ``s`` is ``boyan_features(s)``."""
    return np.stack([boyan_features(s).to_dense() for s in range(BOYAN_N_STATES + 1)])


@dataclass(frozen=True)
class TileCoder:
    """Hashed grid tile coding over a 2-d box.

    Tiling ``k`` is a ``grid x grid`` partition of the box shifted by
    ``k/tilings`` of a tile width along both axes, so it needs ``grid + 1``
    cells per axis to cover the box. Each ``(tiling, xi, yi)`` cell is hashed
    with a keyed BLAKE2b digest to an index below ``size``.
    """

    low: tuple[float, float] = (-1.2, -0.07)
    high: tuple[float, float] = (0.5, 0.07)
    tilings: int = 10
    grid: int = 8
    size: int = 10_000
    seed: int = 0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)
    _vcache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.tilings < 1 or self.grid < 1 or self.size < 1:
            raise ValueError("tilings, grid and size must be positive")
        if not all(h > l for l, h in zip(self.low, self.high)):
            raise ValueError("high must exceed low in both dimensions")

    @property
    def widths(self) -> tuple[float, float]:
        return tuple((h - l) / self.grid for l, h in zip(self.low, self.high))

    def cells(self, x: float, y: float) -> list[tuple[int, int, int]]:
        """Unhashed ``(tiling, xi, yi)`` cell of every tiling containing the point."""
        wx, wy = self.widths
        sx = (x - self.low[0]) / wx
        sy = (y - self.low[1]) / wy
        out = []
        for k in range(self.tilings):
            off = k / self.tilings
            out.append((k, math.floor(sx + off), math.floor(sy + off)))
        return out

    def hash_cell(self, cell: tuple[int, int, int]) -> int:
        h = self._cache.get(cell)
        if h is None:
            key = self.seed.to_bytes(8, "little", signed=True)
            data = b"%d,%d,%d" % cell
            digest = hashlib.blake2b(data, digest_size=8, key=key).digest()
            h = int.from_bytes(digest, "little") % self.size
            self._cache[cell] = h
        return h

    def encode(self, x: float, y: float) -> SparseVec:
        cells = tuple(self.cells(x, y))
        vec = self._vcache.get(cells)
        if vec is None:
            active = sorted({self.hash_cell(c) for c in cells})
            vec = SparseVec(self.size, active, (1.0,) * len(active))
            self._vcache[cells] = vec
        return vec

    def to_config(self) -> dict:
        return {
            "tilings": self.tilings,
            "grid": self.grid,
            "size": self.size,
            "seed": self.seed,
        }


def tile_code(position: float, velocity: float, coder: TileCoder) -> SparseVec:
    return coder.encode(position, velocity)
