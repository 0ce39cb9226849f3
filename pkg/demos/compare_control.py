"""Mountain Car control: Sarsa against Dyna control with MG sweeping.

Prints mean steps-to-goal over early and late episode windows for each
algorithm at fixed step sizes.

    python demos/compare_control.py [--seeds 5] [--episodes 100]
"""
from __future__ import annotations

import argparse

import numpy as np

from lineardyna.harness.config import ExperimentConfig
from lineardyna.harness.runner import run_experiment

SETTINGS = {
    "sarsa": {"alpha0": 0.1, "n0": 100.0},
    "dyna-control-mg": {"alpha0": 0.01, "n0": 100.0},
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--episodes", type=int, default=100)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    window = max(1, args.episodes // 5)
    for alg, params in SETTINGS.items():
        cfg = ExperimentConfig(env="mountain-car", algorithm=alg, p=1, episodes=args.episodes,
                               seeds=args.seeds, **params)
        curves = [c for c in run_experiment(cfg, args.jobs) if not c.diverged]
        if not curves:
            print(f"{alg}: every run diverged")
            continue
        steps = np.array([c.losses for c in curves])
        early, late = steps[:, :window].mean(), steps[:, -window:].mean()
        print(f"{alg:<16} first {window} episodes {early:7.1f} steps, last {window} {late:7.1f} steps "
              f"({len(curves)}/{args.seeds} runs finite)")


if __name__ == "__main__":
    main()
