"""Checkpoint files for planner state.

A planner snapshot holds ``theta``, the queue contents and references to
model snapshot files written next to it (one per action for control agents).
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ..model import ActionModelSet, load_model, save_model

_FORMAT = "lineardyna-planner v1"


def _models_of(planner) -> list:
    if hasattr(planner, "models"):
        return list(planner.models)
    if hasattr(planner, "model"):
        return [planner.model]
    return []


def save_planner(planner, path: str | os.PathLike) -> None:
    path = Path(path)
    refs = []
    for a, m in enumerate(_models_of(planner)):
        ref = f"{path.stem}.model{a}.txt"
        save_model(m, path.with_name(ref))
        refs.append(ref)
    lines = [f"# {_FORMAT}", f"algorithm {planner.name}", f"n {planner.n}", f"updates {planner.updates}"]
    lines.append(f"models {len(refs)}")
    lines.extend(f"model {r}" for r in refs)
    theta = [(int(i), float(planner._theta[i])) for i in np.flatnonzero(planner._theta)]
    lines.append(f"theta {len(theta)}")
    lines.extend(f"{i} {v!r}" for i, v in theta)
    queue = planner.queue.items() if hasattr(planner, "queue") else []
    lines.append(f"queue {len(queue)}")
    lines.extend(f"{i} {p!r}" for i, p in queue)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def restore_planner(planner, path: str | os.PathLike) -> None:
    """Load a snapshot into an already constructed planner of the same kind."""
    path = Path(path)
    lines = iter(path.read_text(encoding="ascii").splitlines())
    if next(lines).strip() != f"# {_FORMAT}":
        raise ValueError(f"{path} is not a planner snapshot")

    def field(name):
        key, val = next(lines).split(maxsplit=1)
        if key != name:
            raise ValueError(f"expected {name!r}, found {key!r}")
        return val

    algo = field("algorithm")
    if algo != planner.name:
        raise ValueError(f"snapshot is for {algo!r}, planner is {planner.name!r}")
    n = int(field("n"))
    if n != planner.n:
        raise ValueError("dimension mismatch")
    updates = int(field("updates"))
    models = [load_model(path.with_name(field("model"))) for _ in range(int(field("models")))]
    theta = np.zeros(n)
    for _ in range(int(field("theta"))):
        i, v = next(lines).split()
        theta[int(i)] = float(v)
    queue = []
    for _ in range(int(field("queue"))):
        i, p = next(lines).split()
        queue.append((int(i), float(p)))

    current = _models_of(planner)
    if len(models) != len(current):
        raise ValueError("snapshot model count does not match planner")
    if hasattr(planner, "models"):
        planner.models = ActionModelSet(models)
    elif models:
        planner.model = models[0]
    planner._theta = theta
    planner.updates = updates
    if hasattr(planner, "queue"):
        planner.queue.clear()
        for i, p in queue:
            planner.queue.push(i, p)
