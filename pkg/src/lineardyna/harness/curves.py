"""Learning curves, their aggregation across seeds, and CSV emission."""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

CSV_HEADER = "episode,mean,stderr,n_runs,n_diverged"


@dataclass
class LearningCurve:
    """Loss measured at increasing episode indices for one run."""

    episodes: list[int] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)
    seed: int = 0
    config_hash: str = ""
    diverged: bool = False
    diverged_at: int | None = None
    trajectory_digest: str = ""

    def record(self, episode: int, loss: float) -> None:
        if self.episodes and episode <= self.episodes[-1]:
            raise ValueError("episode indices must be strictly increasing")
        self.episodes.append(int(episode))
        self.losses.append(float(loss))


@dataclass
class AggregatedCurve:
    episodes: list[int]
    mean: list[float]
    stderr: list[float]
    n_runs: int
    n_diverged: int

    def __len__(self) -> int:
        return len(self.episodes)

    def rows(self):
        for t, m, s in zip(self.episodes, self.mean, self.stderr):
            yield t, m, s, self.n_runs, self.n_diverged


def aggregate(curves: Sequence[LearningCurve]) -> AggregatedCurve:
    """Per-point mean and standard error over the non-diverged curves."""
    if len(curves) < 2:
        raise ValueError("aggregation needs at least two curves")
    ok = [c for c in curves if not c.diverged]
    n_div = len(curves) - len(ok)
    if not ok:
        return AggregatedCurve([], [], [], 0, n_div)
    points = ok[0].episodes
    for c in ok[1:]:
        if c.episodes != points:
            raise ValueError("curves are measured at different evaluation points")
    L = np.array([c.losses for c in ok], dtype=float).reshape(len(ok), len(points))
    mean = L.mean(axis=0)
    if len(ok) > 1:
        se = L.std(axis=0, ddof=1) / math.sqrt(len(ok))
    else:
        se = np.full(len(points), np.nan)
    return AggregatedCurve(list(points), mean.tolist(), se.tolist(), len(ok), n_div)


def format_value(v: float) -> str:
    return format(float(v), ".12g")


def format_csv(curve: AggregatedCurve) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for t, m, s, n, d in curve.rows():
        buf.write(f"{int(t)},{format_value(m)},{format_value(s)},{int(n)},{int(d)}\n")
    return buf.getvalue()


def emit_csv(curve: AggregatedCurve, destination) -> None:
    """Write ``curve`` to a path or a text stream."""
    text = format_csv(curve)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(os.fspath(destination), "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def read_csv(source) -> AggregatedCurve:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(os.fspath(source), encoding="ascii") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a learning-curve CSV")
    eps, means, ses, n_runs, n_div = [], [], [], 0, 0
    for line in lines[1:]:
        t, m, s, n, d = line.split(",")
        eps.append(int(t))
        means.append(float(m))
        ses.append(float(s))
        n_runs, n_div = int(n), int(d)
    return AggregatedCurve(eps, means, ses, n_runs, n_div)
