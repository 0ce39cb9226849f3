"""Search for a 2x2 model on which TD(0) planning diverges but residual-gradient planning converges.

Candidates have numerical radius above 1, a well-conditioned ``I - gamma F^T``
and an unstable expected TD planning drift. Each candidate is then simulated
with uniform unit-basis planning; the first one where the TD planner trips the
divergence guard and the residual-gradient planner lands within 1e-4 of the
fixed point is printed, ready to be pasted into a test.

    python demos/find_td_unstable_model.py [--seed 0]
"""
from __future__ import annotations

import argparse

import numpy as np

from lineardyna.analysis import fixed_point, numerical_radius, td_planning_stable
from lineardyna.errors import DivergenceError
from lineardyna.harness.runner import step_size
from lineardyna.model import LinearModel
from lineardyna.planners import DynaRandom

GAMMA = 0.9
ALPHA0, N0 = 0.1, 1e6
STEPS = 100_000


def simulate(model: LinearModel, rule: str, seed: int) -> tuple[bool, np.ndarray]:
    """Run planning only; returns ``(diverged, theta)``."""
    planner = DynaRandom(2, GAMMA, p=0, rng=np.random.default_rng(seed), rule=rule,
                         model=model, learn_model=False)
    try:
        for t in range(1, STEPS + 1):
            planner.plan(1, step_size(ALPHA0, N0, t))
    except DivergenceError:
        return True, planner.theta
    return False, planner.theta


def search(seed: int, tries: int = 10_000):
    rng = np.random.default_rng(seed)
    for k in range(tries):
        F = np.round(rng.uniform(-3, 3, size=(2, 2)), 2)
        b = np.round(rng.uniform(-1, 1, size=2), 2)
        G = np.eye(2) - GAMMA * F.T
        if numerical_radius(F) <= 1 or np.linalg.cond(G) > 20 or td_planning_stable(F, GAMMA):
            continue
        model = LinearModel.from_dense(F, b)
        target = fixed_point(model, GAMMA)
        td_div, _ = simulate(model, "td0", seed + k)
        rg_div, theta = simulate(model, "rg", seed + k)
        if td_div and not rg_div and np.max(np.abs(theta - target)) <= 1e-4:
            return k, F, b, target
    raise RuntimeError("no instance found")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    k, F, b, target = search(args.seed)
    print(f"candidate {k} (search seed {args.seed}, simulation seed {args.seed + k})")
    print(f"F = {F.tolist()}")
    print(f"b = {b.tolist()}")
    print(f"numerical radius = {numerical_radius(F):.4f}, fixed point = {target.tolist()}")


if __name__ == "__main__":
    main()
