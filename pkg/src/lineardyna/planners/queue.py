from __future__ import annotations

import numpy as np

from .. import _kernels as K

PRIORITY_FLOOR = 1e-9


class SweepQueue:
    """Max-priority queue over the feature indices ``0..n-1``.

    Each index is queued at most once. Pushing an index that is already
    queued keeps the larger of the two priorities. Pushes at or below
    ``floor`` are dropped. Equal priorities pop in increasing index order, so
    the pop sequence is a pure function of the push sequence.

    Priorities live in a dense array (0 means absent) that the compiled
    sweeps share; popping is a linear argmax.
    """

    __slots__ = ("n", "prio", "size", "floor")

    def __init__(self, n: int, floor: float = PRIORITY_FLOOR):
        if n <= 0:
            raise ValueError("queue dimension must be positive")
        if not floor >= 0.0:
            raise ValueError("priority floor must be non-negative")
        self.n = int(n)
        self.prio = np.zeros(self.n)
        self.size = np.zeros(1, dtype=np.int64)
        self.floor = float(floor)

    def __len__(self) -> int:
        return int(self.size[0])

    def __bool__(self) -> bool:
        return bool(self.size[0] > 0)

    def __contains__(self, i: int) -> bool:
        return bool(0 <= i < self.n and self.prio[i] > 0.0)

    def priority(self, i: int) -> float:
        if i not in self:
            raise KeyError(i)
        return float(self.prio[i])

    def push(self, i: int, priority: float) -> bool:
        """Insert or raise ``i``; returns whether the queue changed."""
        if not 0 <= i < self.n:
            raise IndexError(i)
        return bool(K.q_push(self.prio, self.size, int(i), float(priority), self.floor))

    def pop(self) -> int:
        return self.pop_item()[0]

    def pop_item(self) -> tuple[int, float]:
        if not self:
            raise IndexError("pop from an empty SweepQueue")
        i, p = K.q_pop(self.prio, self.size)
        return int(i), float(p)

    def items(self) -> list[tuple[int, float]]:
        """Queue contents as ``(index, priority)`` sorted by index."""
        nz = np.flatnonzero(self.prio)
        return [(int(i), float(self.prio[i])) for i in nz]

    def clear(self) -> None:
        self.prio[:] = 0.0
        self.size[0] = 0
