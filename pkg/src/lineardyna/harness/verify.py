"""Quick randomized self-checks of the analysis oracles against the planners."""
from __future__ import annotations

import numpy as np

from ..analysis import fixed_point, lstd_solve, numerical_radius, td_fixed_loss
from ..features import SparseVec, unit_basis
from ..model import LinearModel, TransitionDataset, fit_least_squares
from ..planners import DynaRandom, rg_update, td0_update


def random_dataset(rng: np.random.Generator, n: int, k: int, density: float = 0.6) -> TransitionDataset:
    phis = rng.normal(size=(k, n)) * (rng.random((k, n)) < density)
    phis[np.arange(k) % n, np.arange(k) % n] += 1.0  # keep C full rank
    nexts = rng.normal(size=(k, n)) * (rng.random((k, n)) < density) * 0.5
    return TransitionDataset.from_dense(phis, rng.normal(size=k), nexts)


def random_stable_model(rng: np.random.Generator, n: int, radius: float = 0.8) -> LinearModel:
    """Random dense model rescaled so its numerical radius equals ``radius``."""
    while True:
        F = rng.normal(size=(n, n))
        r = numerical_radius(F)
        if r > 0.1:
            return LinearModel.from_dense(F * (radius / r), rng.normal(size=n), drop_tol=0.0)


def check_lstd_equivalence(rng, trials=20) -> float:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        data = random_dataset(rng, n, int(rng.integers(20, 81)))
        gamma = float(rng.choice([0.5, 0.9, 0.99]))
        a = lstd_solve(data, gamma)
        b = fixed_point(fit_least_squares(data, drop_tol=0.0), gamma)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def check_stationarity(rng, trials=10) -> float:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        m = random_stable_model(rng, n)
        gamma = 0.9
        theta = fixed_point(m, gamma)
        for j in range(n):
            phi = unit_basis(j, n)
            nxt, r = m.predict(phi)
            for rule in (td0_update, rg_update):
                th = theta.copy()
                rule(th, phi, r, nxt, gamma, 1.0)
                worst = max(worst, float(np.max(np.abs(th - theta))))
    return worst


def check_numerical_radius(rng, trials=10) -> float:
    """Largest amount by which a sampled quadratic form exceeds the reported radius."""
    excess = -np.inf
    for _ in range(trials):
        n = int(rng.integers(1, 7))
        F = rng.normal(size=(n, n))
        x = rng.normal(size=(2000, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        sampled = np.einsum("ki,ij,kj->k", x, F, x).max()
        excess = max(excess, sampled - numerical_radius(F))
    return float(excess)


def check_loss_forms(rng, trials=5) -> float:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        data = random_dataset(rng, n, 40)
        theta = rng.normal(size=n)
        a = td_fixed_loss(data, theta, 0.9, method="matrix")
        b = td_fixed_loss(data, theta, 0.9, method="replay")
        worst = max(worst, abs(a - b) / max(1.0, a))
    return worst


def check_mu_independence(rng, iterations=20_000) -> float:
    n = 3
    m = random_stable_model(rng, n)
    target = fixed_point(m, 0.9)
    out = []
    for mu in (None, [0.8, 0.1, 0.1]):
        planner = DynaRandom(n, 0.9, p=0, rng=np.random.default_rng(1), mu=mu, model=m.copy(), learn_model=False)
        planner.plan(iterations, 0.2)
        out.append(planner.theta)
    return float(max(np.max(np.abs(t - target)) for t in out))


CHECKS = [
    ("LSTD solution equals fixed point of least-squares model", check_lstd_equivalence, 1e-8),
    ("fixed point is stationary under TD(0) and residual-gradient backups", check_stationarity, 1e-12),
    ("numerical radius bounds sampled quadratic forms", check_numerical_radius, 1e-9),
    ("matrix and replay TD losses agree", check_loss_forms, 1e-10),
    ("random-basis planning converges to the fixed point for two sampling laws", check_mu_independence, 1e-6),
]


def run_checks(seed: int = 0, stream=None) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn, tol in CHECKS:
        value = fn(rng)
        passed = value <= tol
        ok &= passed
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {value:.3g} (tolerance {tol:g})"
        print(line, file=stream)
    return ok
