"""Boyan-chain comparison of TD(0) and the three Dyna planners.

Sweeps the step-size grid for every algorithm, keeps each algorithm's best
non-diverging cell, and prints its RMSE at a few checkpoints.

    python demos/compare_boyan.py [--seeds 30] [--episodes 200] [--jobs 1]
"""
from __future__ import annotations

import argparse
from pathlib import Path

from lineardyna.analysis import boyan_rmse_floor
from lineardyna.harness.sweep import run_sweep, select_best

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "boyan_grid.cfg"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    results = run_sweep(CONFIG.read_text(), seeds=args.seeds, episodes=args.episodes, jobs=args.jobs)
    floor, _ = boyan_rmse_floor()
    print(f"best achievable RMSE with these features: {floor:.3f}")
    checkpoints = sorted({t for t in (1, 10, 50) if t < args.episodes} | {args.episodes})
    print(f"{'algorithm':<12} {'alpha0':>7} {'N0':>8} " + " ".join(f"ep{t:>4}" for t in checkpoints))
    for alg, cell in select_best(results).items():
        if cell is None:
            print(f"{alg:<12} every cell diverged")
            continue
        agg = cell.aggregated
        by_ep = dict(zip(agg.episodes, agg.mean))
        cols = " ".join(f"{by_ep.get(t, float('nan')):6.2f}" for t in checkpoints)
        print(f"{alg:<12} {cell.config.alpha0:>7g} {cell.config.n0:>8g} {cols}")


if __name__ == "__main__":
    main()
